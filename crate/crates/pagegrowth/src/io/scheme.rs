use std::io::{Read, Write};

use pagegrowth_core::growth::{SizeClass, SizeScheme};
use serde::Deserialize;

use super::check_header;
use crate::error::{AppError, Result};

#[derive(Deserialize)]
struct Row {
    label: String,
    lower: u64,
    upper: u64,
}

/// Size classes from a `label,lower,upper` CSV (lower inclusive, upper
/// exclusive).
pub fn read_scheme<R: Read>(input: R) -> Result<SizeScheme> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(&mut rdr, &["label", "lower", "upper"])?;
    let classes = rdr
        .deserialize::<Row>()
        .map(|r| {
            r.map(|r| SizeClass::new(r.label, r.lower, r.upper))
                .map_err(|e| AppError::input(format!("size classes: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SizeScheme::new(classes)?)
}

pub fn write_scheme<W: Write>(out: W, scheme: &SizeScheme) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "lower", "upper"])?;
    for c in scheme.classes() {
        w.write_record([c.label.clone(), c.lower.to_string(), c.upper.to_string()])?;
    }
    w.flush()
}
