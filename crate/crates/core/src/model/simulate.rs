use alloc::vec::Vec;

use libm::{exp, sqrt};
use rand_core::RngCore;

use super::{eval_c_k, eval_mu_b, ModelCoefficients};
use crate::calendar::Timescale;
use crate::error::{Error, Result};
use crate::rng::{open_unit, substream};
use crate::stats::{burr_quantile, laplace_quantile, BurrParams, LaplaceParams};

pub fn sample_laplace<R: RngCore + ?Sized>(p: LaplaceParams, rng: &mut R) -> f64 {
    laplace_quantile(open_unit(rng), p)
}

pub fn sample_burr<R: RngCore + ?Sized>(p: BurrParams, rng: &mut R) -> f64 {
    burr_quantile(open_unit(rng), p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub followers: f64,
    pub engagement: f64,
    pub step: usize,
    pub timescale: Timescale,
}

/// Number of steps at which each parameter hit its floor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClampCounts {
    pub b: usize,
    pub c: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub run: usize,
    pub seed: u64,
    /// `steps + 1` states, starting from the initial sizes at step 0.
    pub states: Vec<SimState>,
    /// Sampled engagement log growth per step.
    pub log_engagement_growth: Vec<f64>,
    /// Sampled gross follower growth per step.
    pub follower_growth: Vec<f64>,
    pub clamps: ClampCounts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub timescale: Timescale,
    pub initial_followers: f64,
    pub initial_engagement: f64,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
}

/// Runs `runs` independent trajectories. Run `i` draws from substream `i`
/// of `seed`; each step draws the engagement growth first, then the follower
/// growth, both parameterised by the sizes at the start of the step.
pub fn simulate(coeffs: &ModelCoefficients, cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    if cfg.steps == 0 || cfg.runs == 0 {
        return Err(Error::InvalidArgument("steps and runs must be at least 1".into()));
    }
    if !(cfg.initial_followers > 0.0 && cfg.initial_engagement > 0.0) {
        return Err(Error::Domain("initial sizes must be positive".into()));
    }
    if !coeffs.covers(cfg.timescale) {
        return Err(Error::MissingCoefficients(alloc::format!("timescale {}", cfg.timescale)));
    }
    (0..cfg.runs).map(|run| simulate_run(coeffs, cfg, run)).collect()
}

fn simulate_run(coeffs: &ModelCoefficients, cfg: &SimConfig, run: usize) -> Result<Trajectory> {
    let mut rng = substream(cfg.seed, run as u64);
    let mut state = SimState {
        followers: cfg.initial_followers,
        engagement: cfg.initial_engagement,
        step: 0,
        timescale: cfg.timescale,
    };
    let mut traj = Trajectory {
        run,
        seed: cfg.seed,
        states: Vec::with_capacity(cfg.steps + 1),
        log_engagement_growth: Vec::with_capacity(cfg.steps),
        follower_growth: Vec::with_capacity(cfg.steps),
        clamps: ClampCounts::default(),
    };
    traj.states.push(state);
    for step in 1..=cfg.steps {
        let (laplace, lf) = eval_mu_b(coeffs, cfg.timescale, state.followers, state.engagement)?;
        let (burr, bf) = eval_c_k(coeffs, cfg.timescale, state.followers)?;
        traj.clamps.b += usize::from(lf.b);
        traj.clamps.c += usize::from(bf.c);
        traj.clamps.k += usize::from(bf.k);
        let g = sample_laplace(laplace, &mut rng);
        let r = sample_burr(burr, &mut rng);
        state = SimState {
            followers: state.followers * r,
            engagement: state.engagement * exp(g),
            step,
            timescale: cfg.timescale,
        };
        if !(state.followers > 0.0 && state.followers.is_finite() && state.engagement > 0.0 && state.engagement.is_finite()) {
            return Err(Error::StateOutOfRange { run, step });
        }
        traj.log_engagement_growth.push(g);
        traj.follower_growth.push(r);
        traj.states.push(state);
    }
    Ok(traj)
}

/// Cross-run mean and standard error at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSummary {
    pub step: usize,
    pub mean_followers: f64,
    pub se_followers: f64,
    pub mean_engagement: f64,
    pub se_engagement: f64,
}

pub fn summarize(trajectories: &[Trajectory]) -> Vec<StepSummary> {
    let Some(first) = trajectories.first() else {
        return Vec::new();
    };
    (0..first.states.len())
        .map(|step| {
            let f: Vec<f64> = trajectories.iter().map(|t| t.states[step].followers).collect();
            let e: Vec<f64> = trajectories.iter().map(|t| t.states[step].engagement).collect();
            let (mf, sf) = mean_se(&f);
            let (me, se) = mean_se(&e);
            StepSummary {
                step,
                mean_followers: mf,
                se_followers: sf,
                mean_engagement: me,
                se_engagement: se,
            }
        })
        .collect()
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, sqrt(var / n))
}

/// `(followers, engagement)` of every state divided by the final state's.
pub fn normalized_to_final(traj: &Trajectory) -> Vec<(f64, f64)> {
    let last = traj.states.last().expect("trajectory has states");
    traj.states
        .iter()
        .map(|s| (s.followers / last.followers, s.engagement / last.engagement))
        .collect()
}
