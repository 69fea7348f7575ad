use std::path::Path;

use pagegrowth_core::calendar::Timescale;
use pagegrowth_core::model::{normalized_to_final, simulate, summarize, ModelCoefficients, SimConfig, StepSummary, Trajectory};
use serde::Serialize;

use super::mean;
use crate::error::{AppError, Result};
use crate::io::tables::{write_table, TRAJECTORY_HEADER};

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub timescales: Vec<Timescale>,
    pub initial_followers: Vec<f64>,
    pub initial_engagement: f64,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            timescales: vec![Timescale::Weekly, Timescale::Monthly, Timescale::Quarterly],
            initial_followers: vec![25_000.0, 250_000.0, 1_000_000.0],
            initial_engagement: 10_000.0,
            steps: 20,
            runs: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub timescale: Timescale,
    pub initial_followers: f64,
    pub trajectories: Vec<Trajectory>,
    pub summary: Vec<StepSummary>,
}

impl SimulationRun {
    /// Mean gross follower growth over every step of every run.
    pub fn mean_follower_growth(&self) -> f64 {
        mean(self.trajectories.iter().flat_map(|t| t.follower_growth.iter().copied()))
    }

    /// Mean engagement log growth per step over every run.
    pub fn engagement_drift(&self) -> f64 {
        mean(self.trajectories.iter().flat_map(|t| t.log_engagement_growth.iter().copied()))
    }
}

/// One batch of runs per (timescale, starting follower count). Every batch
/// uses the same seed, so batches differ only in their parameters.
pub fn run_simulations(coeffs: &ModelCoefficients, cfg: &SimulateConfig) -> Result<Vec<SimulationRun>> {
    if cfg.timescales.contains(&Timescale::Daily) {
        return Err(AppError::input("simulation is defined for W, M and Q only"));
    }
    let mut out = Vec::new();
    for &timescale in &cfg.timescales {
        for &f0 in &cfg.initial_followers {
            let trajectories = simulate(
                coeffs,
                &SimConfig {
                    timescale,
                    initial_followers: f0,
                    initial_engagement: cfg.initial_engagement,
                    steps: cfg.steps,
                    runs: cfg.runs,
                    seed: cfg.seed,
                },
            )?;
            let summary = summarize(&trajectories);
            out.push(SimulationRun {
                timescale,
                initial_followers: f0,
                trajectories,
                summary,
            });
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct SummaryRow {
    timescale: &'static str,
    initial_followers: f64,
    step: usize,
    mean_followers: f64,
    se_followers: f64,
    mean_engagement: f64,
    se_engagement: f64,
}

#[derive(Serialize)]
struct NormalizedRow {
    timescale: &'static str,
    initial_followers: f64,
    run: usize,
    step: usize,
    followers: f64,
    engagement: f64,
}

#[derive(Serialize)]
struct DriftRow {
    timescale: &'static str,
    initial_followers: f64,
    mean_follower_growth: f64,
    mean_log_engagement_growth: f64,
    clamped_b: usize,
    clamped_c: usize,
    clamped_k: usize,
}

fn size_tag(f: f64) -> String {
    match f {
        f if f >= 1e6 && f % 1e6 == 0.0 => format!("{}M", f / 1e6),
        f if f >= 1e3 && f % 1e3 == 0.0 => format!("{}K", f / 1e3),
        f => format!("{f}"),
    }
}

/// `trajectories_<T>_<f0>.csv` per batch plus `summary.csv`,
/// `normalized.csv` and `drift.csv` across batches.
pub fn write_simulations(dir: &Path, runs: &[SimulationRun]) -> Result<()> {
    for r in runs {
        let name = format!("trajectories_{}_{}.csv", r.timescale.code(), size_tag(r.initial_followers));
        let rows = r
            .trajectories
            .iter()
            .flat_map(|t| t.states.iter().map(move |s| (t.run, s.step, s.followers, s.engagement)));
        write_table(&dir.join(name), &TRAJECTORY_HEADER, rows)?;
    }
    let summary = runs.iter().flat_map(|r| {
        r.summary.iter().map(move |s| SummaryRow {
            timescale: r.timescale.code(),
            initial_followers: r.initial_followers,
            step: s.step,
            mean_followers: s.mean_followers,
            se_followers: s.se_followers,
            mean_engagement: s.mean_engagement,
            se_engagement: s.se_engagement,
        })
    });
    write_table(
        &dir.join("summary.csv"),
        &["timescale", "initial_followers", "step", "mean_followers", "se_followers", "mean_engagement", "se_engagement"],
        summary,
    )?;
    let normalized = runs.iter().flat_map(|r| {
        r.trajectories.iter().flat_map(move |t| {
            normalized_to_final(t).into_iter().enumerate().map(move |(step, (f, e))| NormalizedRow {
                timescale: r.timescale.code(),
                initial_followers: r.initial_followers,
                run: t.run,
                step,
                followers: f,
                engagement: e,
            })
        })
    });
    write_table(
        &dir.join("normalized.csv"),
        &["timescale", "initial_followers", "run", "step", "followers", "engagement"],
        normalized,
    )?;
    let drift = runs.iter().map(|r| DriftRow {
        timescale: r.timescale.code(),
        initial_followers: r.initial_followers,
        mean_follower_growth: r.mean_follower_growth(),
        mean_log_engagement_growth: r.engagement_drift(),
        clamped_b: r.trajectories.iter().map(|t| t.clamps.b).sum(),
        clamped_c: r.trajectories.iter().map(|t| t.clamps.c).sum(),
        clamped_k: r.trajectories.iter().map(|t| t.clamps.k).sum(),
    });
    write_table(
        &dir.join("drift.csv"),
        &[
            "timescale",
            "initial_followers",
            "mean_follower_growth",
            "mean_log_engagement_growth",
            "clamped_b",
            "clamped_c",
            "clamped_k",
        ],
        drift,
    )
}
