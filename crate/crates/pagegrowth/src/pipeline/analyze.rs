use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use pagegrowth_core::aggregate::FollowerRule;
use pagegrowth_core::calendar::Timescale;
use pagegrowth_core::growth::{
    bin_by_follower_class, quartile_bins_trimmed, split_class_by_median, GrowthSample, Metric, SizeScheme,
    SkipReport,
};
use pagegrowth_core::record::Dataset;
use pagegrowth_core::stats::{
    class_test_matrix, detailed_balance_check, fit_burr, fit_laplace, MIN_SYMMETRY_SAMPLES,
};
use serde::Serialize;

use super::{aggregate_all, pooled_samples, SeriesMap};
use crate::error::{AppError, Result};
use crate::io::tables::{format_p, write_table, FitRow, GrowthRow, MatrixRow, FIT_HEADER, GROWTH_HEADER, MATRIX_HEADER};

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub timescales: Vec<Timescale>,
    pub scheme: SizeScheme,
    /// Percentiles bounding prior engagement before quartile binning.
    pub trim: (f64, f64),
    pub metric: Metric,
    pub rule: FollowerRule,
}

#[derive(Debug, Clone, Serialize)]
pub struct BalanceRow {
    pub metric: &'static str,
    pub timescale: &'static str,
    pub n: usize,
    pub u: f64,
    pub p: f64,
    pub method: String,
}

#[derive(Debug, Clone)]
pub struct TimescaleAnalysis {
    pub timescale: Timescale,
    pub samples: BTreeMap<Metric, Vec<GrowthSample>>,
    pub skips: BTreeMap<Metric, SkipReport>,
    pub matrices: Vec<MatrixRow>,
    pub fits: Vec<FitRow>,
    pub balance: Vec<BalanceRow>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub timescales: Vec<TimescaleAnalysis>,
    pub warnings: Vec<String>,
}

impl Analysis {
    pub fn matrices(&self) -> impl Iterator<Item = &MatrixRow> {
        self.timescales.iter().flat_map(|t| t.matrices.iter())
    }
}

/// Metrics tested for a configured metric: itself, the per-post variant
/// alongside total engagement, and follower growth.
fn metrics_for(metric: Metric) -> Vec<Metric> {
    let mut out = vec![metric];
    if metric == Metric::Engagement {
        out.push(Metric::MeanEngagement);
    }
    if metric != Metric::Followers {
        out.push(Metric::Followers);
    }
    out
}

pub fn analyze(ds: &Dataset, cfg: &AnalyzeConfig) -> Result<Analysis> {
    if cfg.timescales.is_empty() {
        return Err(AppError::input("no timescales selected"));
    }
    let all = aggregate_all(ds, &cfg.timescales, cfg.rule);
    let mut warnings = Vec::new();
    let timescales = all
        .iter()
        .map(|(t, series)| analyze_timescale(*t, series, cfg, &mut warnings))
        .collect::<Result<Vec<_>>>()?;
    Ok(Analysis { timescales, warnings })
}

fn analyze_timescale(
    timescale: Timescale,
    series: &SeriesMap,
    cfg: &AnalyzeConfig,
    warnings: &mut Vec<String>,
) -> Result<TimescaleAnalysis> {
    let mut out = TimescaleAnalysis {
        timescale,
        samples: BTreeMap::new(),
        skips: BTreeMap::new(),
        matrices: Vec::new(),
        fits: Vec::new(),
        balance: Vec::new(),
    };
    for metric in metrics_for(cfg.metric).into_iter().chain([Metric::Engagement]) {
        if out.samples.contains_key(&metric) {
            continue;
        }
        let (samples, skips) = pooled_samples(series, metric);
        out.samples.insert(metric, samples);
        out.skips.insert(metric, skips);
    }
    for metric in metrics_for(cfg.metric) {
        let samples = &out.samples[&metric];
        for (size_by, bins) in size_bins(samples, cfg, warnings, timescale) {
            push_matrix(&mut out.matrices, metric, size_by, timescale, &bins, warnings);
        }
        if samples.len() >= MIN_SYMMETRY_SAMPLES {
            let g: Vec<f64> = samples.iter().map(|s| s.log_growth).collect();
            let r = detailed_balance_check(&g)?;
            out.balance.push(BalanceRow {
                metric: metric.code(),
                timescale: timescale.code(),
                n: g.len(),
                u: r.u_statistic,
                p: r.p_value,
                method: r.method.to_string(),
            });
        } else {
            warnings.push(format!(
                "{timescale} {metric}: {} growth samples, symmetry test needs {MIN_SYMMETRY_SAMPLES}",
                samples.len()
            ));
        }
    }
    out.fits = fits(&out.samples[&Metric::Engagement], &out.samples[&Metric::Followers], cfg, timescale, warnings);
    Ok(out)
}

type Bins = Vec<(String, Vec<f64>)>;

fn log_rates(samples: &[GrowthSample]) -> Vec<f64> {
    samples.iter().map(|s| s.log_growth).collect()
}

fn size_bins(
    samples: &[GrowthSample],
    cfg: &AnalyzeConfig,
    warnings: &mut Vec<String>,
    timescale: Timescale,
) -> Vec<(&'static str, Bins)> {
    let mut out = Vec::new();
    let classes = bin_by_follower_class(samples, &cfg.scheme);
    out.push((
        "followers",
        classes.iter().map(|(c, s)| (c.label.clone(), log_rates(s))).collect(),
    ));

    match quartile_bins_trimmed(samples, cfg.trim.0, cfg.trim.1) {
        Ok(q) => out.push((
            "engagement",
            q.bins.iter().enumerate().map(|(i, s)| (format!("Q{}", i + 1), log_rates(s))).collect(),
        )),
        Err(e) => warnings.push(format!("{timescale}: engagement quartiles skipped ({e})")),
    }

    let mut halves = Vec::new();
    for (class, members) in &classes {
        match split_class_by_median(members) {
            Ok((lower, upper)) => {
                halves.push((format!("{}:lower", class.label), log_rates(&lower)));
                halves.push((format!("{}:upper", class.label), log_rates(&upper)));
            }
            Err(e) => warnings.push(format!("{timescale}: class {} not split at its median ({e})", class.label)),
        }
    }
    out.push(("followers_median", halves));
    out
}

fn push_matrix(
    rows: &mut Vec<MatrixRow>,
    metric: Metric,
    size_by: &str,
    timescale: Timescale,
    bins: &Bins,
    warnings: &mut Vec<String>,
) {
    let m = match class_test_matrix(bins) {
        Ok(m) => m,
        Err(e) => {
            warnings.push(format!("{timescale} {metric} by {size_by}: no matrix ({e})"));
            return;
        }
    };
    let sides = [("greater", &m.one_sided), ("two-sided", &m.two_sided)];
    for (alternative, cells) in sides {
        for cell in cells {
            let (u, p, method) = match &cell.result {
                Ok(r) => (Some(r.u_statistic), Some(r.p_value), r.method.to_string()),
                Err(reason) => (None, None, format!("absent: {reason}")),
            };
            rows.push(MatrixRow {
                metric: metric.code().into(),
                size_by: size_by.into(),
                timescale: timescale.code().into(),
                row_class: cell.row.clone(),
                col_class: cell.col.clone(),
                alternative: alternative.into(),
                u,
                p,
                method,
            });
        }
    }
}

/// Laplace fits of engagement log growth and Burr fits of gross follower
/// growth, per follower class and over all samples.
fn fits(
    engagement: &[GrowthSample],
    followers: &[GrowthSample],
    cfg: &AnalyzeConfig,
    timescale: Timescale,
    warnings: &mut Vec<String>,
) -> Vec<FitRow> {
    let mut rows = Vec::new();
    let mut cohorts: Vec<(String, Vec<GrowthSample>, Vec<GrowthSample>)> =
        vec![("all".into(), engagement.to_vec(), followers.to_vec())];
    let eng_classes = bin_by_follower_class(engagement, &cfg.scheme);
    let fol_classes = bin_by_follower_class(followers, &cfg.scheme);
    for ((class, e), (_, f)) in eng_classes.into_iter().zip(fol_classes) {
        cohorts.push((class.label.clone(), e, f));
    }
    let t = timescale.code();
    for (cohort, e, f) in cohorts {
        match fit_laplace(&log_rates(&e)) {
            Ok(p) => {
                for (param, value) in [("mu", p.mu), ("b", p.b)] {
                    rows.push(FitRow { cohort: cohort.clone(), timescale: t.into(), distribution: "laplace", param, value });
                }
            }
            Err(err) => warnings.push(format!("{t} {cohort}: no Laplace fit ({err})")),
        }
        let gross: Vec<f64> = f.iter().map(|s| s.gross_growth).collect();
        match fit_burr(&gross) {
            Ok(fit) => {
                for (param, value) in [("c", fit.params.c), ("k", fit.params.k)] {
                    rows.push(FitRow { cohort: cohort.clone(), timescale: t.into(), distribution: "burr", param, value });
                }
            }
            Err(err) => warnings.push(format!("{t} {cohort}: no Burr fit ({err})")),
        }
    }
    rows
}

pub fn write_analysis(dir: &Path, a: &Analysis) -> Result<()> {
    write_table(&dir.join("matrices.csv"), &MATRIX_HEADER, a.matrices())?;
    write_table(&dir.join("fits.csv"), &FIT_HEADER, a.timescales.iter().flat_map(|t| t.fits.iter()))?;
    write_table(
        &dir.join("balance.csv"),
        &["metric", "timescale", "n", "u", "p", "method"],
        a.timescales.iter().flat_map(|t| t.balance.iter()),
    )?;
    let growth = a
        .timescales
        .iter()
        .flat_map(|t| t.samples.values())
        .flatten()
        .map(GrowthRow::from);
    write_table(&dir.join("growth.csv"), &GROWTH_HEADER, growth)?;
    let path = dir.join("report.txt");
    std::fs::write(&path, report(a)).map_err(|e| AppError::io(&path, e))
}

/// Plain-text matrices; `*` marks p < 0.05.
pub fn report(a: &Analysis) -> String {
    let mut s = String::new();
    let mut groups: BTreeMap<(&str, &str, &str, &str), Vec<&MatrixRow>> = BTreeMap::new();
    for r in a.matrices() {
        groups
            .entry((&r.timescale, &r.metric, &r.size_by, &r.alternative))
            .or_default()
            .push(r);
    }
    for ((t, metric, size_by, alt), rows) in groups {
        let _ = writeln!(s, "[{t}] {metric} growth by {size_by}, {alt}");
        for r in rows {
            let shown = match r.p {
                Some(p) => format!("{}{}", format_p(p), if p < 0.05 { " *" } else { "" }),
                None => r.method.clone(),
            };
            let _ = writeln!(s, "  {:>18} vs {:<18} {shown}", r.row_class, r.col_class);
        }
        s.push('\n');
    }
    for t in &a.timescales {
        for b in &t.balance {
            let _ = writeln!(s, "[{}] {} symmetry: p = {}", b.timescale, b.metric, format_p(b.p));
        }
    }
    s
}
