//! Drivers behind the subcommands. Each returns its results in memory;
//! `write_*` functions turn them into files.

mod analyze;
mod cohort;
mod model;
mod simulate;

pub use analyze::{analyze, write_analysis, Analysis, AnalyzeConfig, BalanceRow, TimescaleAnalysis};
pub use cohort::{run_cohort, write_cohort, CohortConfig, CohortRun};
pub use model::{fit_model, write_model, ModelConfig, ModelRun};
pub use simulate::{run_simulations, write_simulations, SimulateConfig, SimulationRun};

use std::collections::BTreeMap;
use std::path::Path;

use pagegrowth_core::aggregate::{aggregate_dataset, AggregatedSeries, FollowerRule};
use pagegrowth_core::calendar::Timescale;
use pagegrowth_core::growth::{growth_samples, GrowthSample, Metric, SkipReport};
use pagegrowth_core::record::{Dataset, Rejection};

use crate::error::Result;
use crate::io::tables::{aggregated_rows, write_table, AGGREGATED_HEADER, REJECTION_HEADER};

pub type SeriesMap = BTreeMap<String, AggregatedSeries>;

pub fn aggregate_all(ds: &Dataset, timescales: &[Timescale], rule: FollowerRule) -> BTreeMap<Timescale, SeriesMap> {
    timescales.iter().map(|t| (*t, aggregate_dataset(ds, *t, rule))).collect()
}

pub fn write_aggregated(path: &Path, all: &BTreeMap<Timescale, SeriesMap>) -> Result<()> {
    write_table(path, &AGGREGATED_HEADER, all.values().flat_map(|m| m.values()).flat_map(aggregated_rows))
}

pub fn write_rejections(path: &Path, files: &[(&str, &[Rejection])]) -> Result<()> {
    let rows = files
        .iter()
        .flat_map(|(file, rs)| rs.iter().map(move |r| (*file, r.line, r.reason.to_string())));
    write_table(path, &REJECTION_HEADER, rows)
}

/// Growth samples of every page, in page order.
pub fn pooled_samples(series: &SeriesMap, metric: Metric) -> (Vec<GrowthSample>, SkipReport) {
    let mut out = Vec::new();
    let mut skips = SkipReport::default();
    for s in series.values() {
        let (samples, sk) = growth_samples(s, metric);
        out.extend(samples);
        skips.merge(sk);
    }
    (out, skips)
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}
