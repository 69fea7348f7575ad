use std::path::Path;

use pagegrowth_core::aggregate::{aggregate_dataset, FollowerRule};
use pagegrowth_core::calendar::Timescale;
use pagegrowth_core::growth::{bin_by_follower_class, quartile_bins_trimmed, GrowthSample, Metric, SizeScheme};
use pagegrowth_core::model::{regress_parameters, BinnedFit, FittedParams, ModelCoefficients, ParamRegression, Parameter};
use pagegrowth_core::record::Dataset;
use pagegrowth_core::stats::{fit_burr, fit_laplace};
use pagegrowth_core::Error;
use serde::Serialize;

use super::{mean, pooled_samples};
use crate::error::{AppError, Result};
use crate::io::{create, write_coefficients};
use crate::io::tables::write_table;

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub timescales: Vec<Timescale>,
    pub scheme: SizeScheme,
    pub trim: (f64, f64),
    pub rule: FollowerRule,
    /// Smallest bin given a Laplace fit; Burr fits need at least 50.
    pub min_bin: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BinRow {
    pub timescale: &'static str,
    pub engagement_quartile: String,
    pub follower_class: String,
    pub n: usize,
    pub mean_ln_followers: f64,
    pub mean_ln_engagement: f64,
    pub distribution: &'static str,
    pub param: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ModelRun {
    pub coefficients: ModelCoefficients,
    pub regressions: Vec<ParamRegression>,
    pub bins: Vec<BinRow>,
    pub warnings: Vec<String>,
}

/// Bins growth samples by engagement quartile and follower class, fits a
/// Laplace law to engagement log growth and a Burr law to gross follower
/// growth in every bin, then regresses each parameter on the bin's mean log
/// sizes.
pub fn fit_model(ds: &Dataset, cfg: &ModelConfig) -> Result<ModelRun> {
    let mut run = ModelRun {
        coefficients: ModelCoefficients::new(),
        regressions: Vec::new(),
        bins: Vec::new(),
        warnings: Vec::new(),
    };
    for &t in &cfg.timescales {
        if t == Timescale::Daily {
            run.warnings.push("no growth model at the daily timescale; skipped".into());
            continue;
        }
        let series = aggregate_dataset(ds, t, cfg.rule);
        let (engagement, _) = pooled_samples(&series, Metric::Engagement);
        let (followers, _) = pooled_samples(&series, Metric::Followers);
        let laplace_bins = binned_fits(&engagement, cfg, t, &mut run, |s| {
            let g: Vec<f64> = s.iter().map(|x| x.log_growth).collect();
            (s.len() >= cfg.min_bin).then(|| fit_laplace(&g).map(FittedParams::Laplace))
        })?;
        let burr_bins = binned_fits(&followers, cfg, t, &mut run, |s| {
            let r: Vec<f64> = s.iter().map(|x| x.gross_growth).collect();
            (s.len() >= cfg.min_bin.max(50)).then(|| fit_burr(&r).map(|f| FittedParams::Burr(f.params)))
        })?;
        for parameter in Parameter::ALL {
            let bins = if parameter.uses_engagement() { &laplace_bins } else { &burr_bins };
            match regress_parameters(bins, parameter, t) {
                Ok(reg) => {
                    run.coefficients.insert(parameter, t, reg.line)?;
                    run.regressions.push(reg);
                }
                Err(e @ Error::InsufficientData { .. }) => {
                    run.warnings.push(format!("{t} {parameter}: not regressed ({e})"));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    if run.regressions.is_empty() {
        return Err(AppError::input("not enough data to regress any parameter"));
    }
    Ok(run)
}

fn binned_fits(
    samples: &[GrowthSample],
    cfg: &ModelConfig,
    t: Timescale,
    run: &mut ModelRun,
    fit: impl Fn(&[GrowthSample]) -> Option<pagegrowth_core::Result<FittedParams>>,
) -> Result<Vec<BinnedFit>> {
    let with_followers: Vec<GrowthSample> = samples.iter().filter(|s| s.prior_followers.is_some()).cloned().collect();
    let quartiles = match quartile_bins_trimmed(&with_followers, cfg.trim.0, cfg.trim.1) {
        Ok(q) => q,
        Err(e) => {
            run.warnings.push(format!("{t}: {} samples not binned ({e})", with_followers.len()));
            return Ok(Vec::new());
        }
    };
    let mut out = Vec::new();
    for (qi, quartile) in quartiles.bins.iter().enumerate() {
        for (class, members) in bin_by_follower_class(quartile, &cfg.scheme) {
            let Some(result) = fit(&members) else { continue };
            let params = match result {
                Ok(p) => p,
                Err(e) if e.is_numerical() => {
                    run.warnings.push(format!("{t} Q{} {}: fit failed ({e})", qi + 1, class.label));
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let b = BinnedFit {
                ln_followers: mean(members.iter().map(|s| (s.prior_followers.unwrap() as f64).ln())),
                ln_engagement: mean(members.iter().map(|s| (s.prior_engagement as f64).ln())),
                fit: params,
            };
            let values = match params {
                FittedParams::Laplace(p) => [("laplace", "mu", p.mu), ("laplace", "b", p.b)],
                FittedParams::Burr(p) => [("burr", "c", p.c), ("burr", "k", p.k)],
            };
            for (distribution, param, value) in values {
                run.bins.push(BinRow {
                    timescale: t.code(),
                    engagement_quartile: format!("Q{}", qi + 1),
                    follower_class: class.label.clone(),
                    n: members.len(),
                    mean_ln_followers: b.ln_followers,
                    mean_ln_engagement: b.ln_engagement,
                    distribution,
                    param,
                    value,
                });
            }
            out.push(b);
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct TermRow {
    parameter: &'static str,
    timescale: &'static str,
    term: &'static str,
    estimate: f64,
    std_error: Option<f64>,
    p_value: Option<f64>,
    r_squared: f64,
    bins: usize,
}

pub fn write_model(dir: &Path, run: &ModelRun) -> Result<()> {
    let path = dir.join("coefficients.csv");
    write_coefficients(create(&path)?, &run.coefficients).map_err(|e| AppError::io(&path, e))?;
    let mut terms = Vec::new();
    for r in &run.regressions {
        let estimates = [Some(r.line.beta0), Some(r.line.beta1), r.line.beta2];
        for (i, (term, est)) in ["beta0", "beta1", "beta2"].into_iter().zip(estimates).enumerate() {
            let Some(estimate) = est else { continue };
            terms.push(TermRow {
                parameter: r.parameter.code(),
                timescale: r.timescale.code(),
                term,
                estimate,
                std_error: r.std_errors.as_ref().map(|v| v[i]),
                p_value: r.p_values.as_ref().map(|v| v[i]),
                r_squared: r.r_squared,
                bins: r.bins,
            });
        }
    }
    write_table(
        &dir.join("regression.csv"),
        &["parameter", "timescale", "term", "estimate", "std_error", "p_value", "r_squared", "bins"],
        terms,
    )?;
    write_table(
        &dir.join("model_bins.csv"),
        &[
            "timescale",
            "engagement_quartile",
            "follower_class",
            "n",
            "mean_ln_followers",
            "mean_ln_engagement",
            "distribution",
            "param",
            "value",
        ],
        &run.bins,
    )
}
