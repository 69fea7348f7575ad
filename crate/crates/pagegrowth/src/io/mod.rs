//! Input parsing and CSV output.

mod coefficients;
mod pages;
mod posts;
mod scheme;
pub mod tables;

pub use coefficients::{read_coefficients, write_coefficients, COEFFICIENT_HEADER};
pub use pages::{parse_pages, write_pages, PAGE_HEADER};
pub use posts::{parse_posts, write_posts, POST_HEADER};
pub use scheme::{read_scheme, write_scheme};

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use pagegrowth_core::record::{build_dataset, Dataset, Rejection};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// JSONL for `.jsonl` and `.ndjson` files, CSV otherwise.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

/// Accepted records plus the quarantined rows. `rows` counts every data
/// row read, so `records.len() + rejections.len() == rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejections: Vec<Rejection>,
    pub rows: usize,
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| AppError::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| AppError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    /// Post rows rejected while parsing or joining, then page rows.
    pub post_rejections: Vec<Rejection>,
    pub page_rejections: Vec<Rejection>,
    pub post_rows: usize,
}

/// Reads both input files and joins them.
pub fn load_dataset(posts: &Path, pages: &Path) -> Result<Loaded> {
    let parsed_posts = parse_posts(open(posts)?, Format::from_path(posts))
        .map_err(|e| AppError::input(format!("{}: {e}", posts.display())))?;
    let parsed_pages = parse_pages(open(pages)?).map_err(|e| AppError::input(format!("{}: {e}", pages.display())))?;
    let page_map = parsed_pages
        .records
        .into_iter()
        .map(|p| (p.page_id.clone(), p))
        .collect();
    let (dataset, joined) = build_dataset(parsed_posts.records, page_map)?;
    let mut post_rejections = parsed_posts.rejections;
    post_rejections.extend(joined);
    Ok(Loaded {
        dataset,
        post_rejections,
        page_rejections: parsed_pages.rejections,
        post_rows: parsed_posts.rows,
    })
}

/// Fatal problems with an input file as a whole.
#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header { found: String, expected: String },

    #[error("duplicate page_id: {}", .0.join(", "))]
    DuplicatePages(Vec<String>),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn check_header<R: std::io::Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), ParseError> {
    let found = rdr.headers()?;
    if found.iter().ne(expected.iter().copied()) {
        return Err(ParseError::Header {
            found: found.iter().collect::<Vec<_>>().join(","),
            expected: expected.join(","),
        });
    }
    Ok(())
}

/// A csv record error is a row rejection unless the stream itself failed.
fn row_error(e: csv::Error) -> Result<(usize, String), ParseError> {
    if let csv::ErrorKind::Io(_) = e.kind() {
        return Err(e.into());
    }
    let line = e.position().map_or(0, |p| p.line() as usize);
    Ok((line, e.to_string()))
}
