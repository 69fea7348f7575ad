//! Output tables. Every file starts with a fixed header row.

use std::path::Path;

use pagegrowth_core::aggregate::AggregatedSeries;
use pagegrowth_core::growth::GrowthSample;
use serde::Serialize;

use super::create;
use crate::error::{AppError, Result};

pub fn write_table<S: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = S>) -> Result<()> {
    let io_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => AppError::io(path, e),
        other => AppError::input(format!("{}: {other:?}", path.display())),
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.serialize(row).map_err(io_err)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Display form of a p-value: four decimals, floored at `<0.0001`.
pub fn format_p(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".into()
    } else {
        format!("{p:.4}")
    }
}

pub const AGGREGATED_HEADER: [&str; 7] =
    ["page_id", "timescale", "window_start", "engagement", "mean_engagement", "post_count", "followers"];

#[derive(Serialize)]
pub struct AggregatedRow<'a> {
    pub page_id: &'a str,
    pub timescale: &'static str,
    pub window_start: String,
    pub engagement: u64,
    pub mean_engagement: f64,
    pub post_count: u64,
    pub followers: Option<u64>,
}

pub fn aggregated_rows(series: &AggregatedSeries) -> impl Iterator<Item = AggregatedRow<'_>> {
    series.windows.iter().map(move |w| AggregatedRow {
        page_id: &series.page_id,
        timescale: series.timescale.code(),
        window_start: w.window.start.to_string(),
        engagement: w.engagement,
        mean_engagement: w.mean_engagement,
        post_count: w.post_count,
        followers: w.followers,
    })
}

pub const GROWTH_HEADER: [&str; 8] = [
    "page_id",
    "timescale",
    "window_start",
    "metric",
    "gross_growth",
    "log_growth",
    "prior_followers",
    "prior_engagement",
];

#[derive(Serialize)]
pub struct GrowthRow<'a> {
    pub page_id: &'a str,
    pub timescale: &'static str,
    pub window_start: String,
    pub metric: &'static str,
    pub gross_growth: f64,
    pub log_growth: f64,
    pub prior_followers: Option<u64>,
    pub prior_engagement: u64,
}

impl<'a> From<&'a GrowthSample> for GrowthRow<'a> {
    fn from(s: &'a GrowthSample) -> Self {
        GrowthRow {
            page_id: &s.page_id,
            timescale: s.timescale.code(),
            window_start: s.window_start.to_string(),
            metric: s.metric.code(),
            gross_growth: s.gross_growth,
            log_growth: s.log_growth,
            prior_followers: s.prior_followers,
            prior_engagement: s.prior_engagement,
        }
    }
}

pub const MATRIX_HEADER: [&str; 9] =
    ["metric", "size_by", "timescale", "row_class", "col_class", "alternative", "u", "p", "method"];

/// One test between two classes. Failed tests leave `u` and `p` empty and
/// carry the reason in `method`.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixRow {
    pub metric: String,
    pub size_by: String,
    pub timescale: String,
    pub row_class: String,
    pub col_class: String,
    pub alternative: String,
    pub u: Option<f64>,
    pub p: Option<f64>,
    pub method: String,
}

pub const FIT_HEADER: [&str; 5] = ["cohort", "timescale", "distribution", "param", "value"];

#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub cohort: String,
    pub timescale: String,
    pub distribution: &'static str,
    pub param: &'static str,
    pub value: f64,
}

pub const TRAJECTORY_HEADER: [&str; 4] = ["run", "step", "followers", "engagement"];

pub const MATCH_HEADER: [&str; 3] = ["questionable_id", "reliable_id", "distance"];

pub const REJECTION_HEADER: [&str; 3] = ["file", "line", "reason"];
