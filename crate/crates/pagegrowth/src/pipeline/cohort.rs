use std::collections::BTreeSet;
use std::path::Path;

use pagegrowth_core::aggregate::{aggregate_dataset, AggregatedSeries, FollowerRule};
use pagegrowth_core::calendar::Timescale;
use pagegrowth_core::cohort::{label_pages, matched_sample, Labeling, MatchedSample, Protocol, Reliability};
use pagegrowth_core::record::Dataset;
use pagegrowth_core::stats::{reliability_comparison, ReliabilityRow};
use serde::Serialize;

use super::mean;
use crate::error::{AppError, Result};
use crate::io::tables::{write_table, MATCH_HEADER};

#[derive(Debug, Clone)]
pub struct CohortConfig {
    pub timescales: Vec<Timescale>,
    pub protocol: Protocol,
    pub rule: FollowerRule,
}

#[derive(Debug, Clone)]
pub struct CohortRun {
    pub labeling: Labeling,
    pub sample: MatchedSample,
    pub reliability: Vec<ReliabilityRow>,
    pub warnings: Vec<String>,
}

/// Labels pages, matches the questionable cohort with reliable pages of
/// similar size and age, and compares the two cohorts at each timescale.
/// Page sizes come from the daily series.
pub fn run_cohort(ds: &Dataset, cfg: &CohortConfig) -> Result<CohortRun> {
    let labeling = label_pages(ds.pages().values());
    let mut warnings = Vec::new();
    if !labeling.unscored.is_empty() {
        warnings.push(format!("{} pages without a score were not labelled", labeling.unscored.len()));
    }
    if labeling.count(Reliability::Questionable) == 0 {
        return Err(AppError::input("no questionable pages to match"));
    }
    let daily = aggregate_dataset(ds, Timescale::Daily, cfg.rule);
    let sample = matched_sample(&labeling, ds.pages(), &daily, ds.end_date(), cfg.protocol)?;
    if !sample.excluded.is_empty() {
        warnings.push(format!(
            "{} pages without follower data were left out of matching: {}",
            sample.excluded.len(),
            sample.excluded.join(", ")
        ));
    }
    let questionable: BTreeSet<&str> = sample.pairs.iter().map(|p| p.questionable_id.as_str()).collect();
    let reliable: BTreeSet<&str> = sample.reliable_ids().collect();
    let mut reliability = Vec::new();
    for &t in &cfg.timescales {
        let series = aggregate_dataset(ds, t, cfg.rule);
        let pick = |ids: &BTreeSet<&str>| -> Vec<AggregatedSeries> {
            ids.iter().filter_map(|id| series.get(*id).cloned()).collect()
        };
        reliability.extend(reliability_comparison(&pick(&questionable), &pick(&reliable))?);
    }
    Ok(CohortRun {
        labeling,
        sample,
        reliability,
        warnings,
    })
}

#[derive(Serialize)]
struct SummaryRow {
    cohort: &'static str,
    pages: usize,
    mean_max_followers: f64,
    mean_lifespan_days: f64,
}

#[derive(Serialize)]
struct FeatureRow<'a> {
    page_id: &'a str,
    cohort: String,
    matched: bool,
    max_followers: f64,
    lifespan_days: f64,
}

#[derive(Serialize)]
struct ReliabilityOut {
    timescale: &'static str,
    quantity: String,
    n_reliable: Option<usize>,
    n_questionable: Option<usize>,
    u: Option<f64>,
    p: Option<f64>,
    method: String,
}

/// `labels.csv`, `match.csv`, `features.csv`, `cohort_summary.csv` and
/// `reliability.csv`.
pub fn write_cohort(dir: &Path, run: &CohortRun) -> Result<()> {
    write_table(
        &dir.join("labels.csv"),
        &["page_id", "score", "label"],
        run.labeling.labels.iter().map(|l| (&l.page_id, l.score, l.label.to_string())),
    )?;
    write_table(
        &dir.join("match.csv"),
        &MATCH_HEADER,
        run.sample.pairs.iter().map(|p| (&p.questionable_id, &p.reliable_id, p.distance)),
    )?;
    let matched: BTreeSet<&str> = run.sample.reliable_ids().collect();
    let features = run.sample.members.iter().map(|m| FeatureRow {
        page_id: &m.page_id,
        cohort: m.label.to_string(),
        matched: m.label == Reliability::Questionable || matched.contains(m.page_id.as_str()),
        max_followers: m.features[0],
        lifespan_days: m.features[1],
    });
    write_table(
        &dir.join("features.csv"),
        &["page_id", "cohort", "matched", "max_followers", "lifespan_days"],
        features,
    )?;
    let groups: [(&'static str, Box<dyn Fn(&pagegrowth_core::cohort::CohortMember) -> bool>); 3] = [
        ("questionable", Box::new(|m| m.label == Reliability::Questionable)),
        ("reliable_pool", Box::new(|m| m.label == Reliability::Reliable)),
        ("reliable_matched", Box::new(|m| matched.contains(m.page_id.as_str()))),
    ];
    let summary = groups.iter().map(|(cohort, keep)| {
        let members: Vec<_> = run.sample.members.iter().filter(|m| keep(m)).collect();
        SummaryRow {
            cohort,
            pages: members.len(),
            mean_max_followers: mean(members.iter().map(|m| m.features[0])),
            mean_lifespan_days: mean(members.iter().map(|m| m.features[1])),
        }
    });
    write_table(
        &dir.join("cohort_summary.csv"),
        &["cohort", "pages", "mean_max_followers", "mean_lifespan_days"],
        summary,
    )?;
    let rows = run.reliability.iter().map(|r| match &r.result {
        Ok(t) => ReliabilityOut {
            timescale: r.timescale.code(),
            quantity: r.quantity.to_string(),
            n_reliable: Some(t.n1),
            n_questionable: Some(t.n2),
            u: Some(t.u_statistic),
            p: Some(t.p_value),
            method: t.method.to_string(),
        },
        Err(reason) => ReliabilityOut {
            timescale: r.timescale.code(),
            quantity: r.quantity.to_string(),
            n_reliable: None,
            n_questionable: None,
            u: None,
            p: None,
            method: format!("absent: {reason}"),
        },
    });
    write_table(
        &dir.join("reliability.csv"),
        &["timescale", "quantity", "n_reliable", "n_questionable", "u", "p", "method"],
        rows,
    )
}
