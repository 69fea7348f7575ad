//! Synthetic post and page files with known growth laws.
//!
//! Every page evolves week by week: weekly engagement is multiplied by
//! `exp(g)` with `g` Laplace, followers by a Burr draw, both parameterised by
//! the weekly coefficients at the page's current size. Each ISO week's
//! engagement is split across that week's posts, so weekly aggregation of
//! the output reproduces the latent weekly engagement up to rounding.

use std::path::Path;

use chrono::{Days, NaiveDate, TimeDelta};
use pagegrowth_core::calendar::{Timescale, Window};
use pagegrowth_core::model::{eval_c_k, eval_mu_b, ModelCoefficients, ParamLine, Parameter};
use pagegrowth_core::record::{PageMeta, PostRecord};
use pagegrowth_core::rng::{open_unit, substream, StreamRng};
use pagegrowth_core::model::{sample_burr, sample_laplace};
use serde::Serialize;

use crate::error::{AppError, Result};
use crate::io::{create, write_coefficients, write_pages, write_posts, Format};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub pages: usize,
    /// Moved back to the Monday of its ISO week.
    pub start: NaiveDate,
    pub weeks: usize,
    pub posts_per_week: usize,
    /// Must cover the weekly timescale.
    pub coefficients: ModelCoefficients,
    /// Log-uniform range of initial follower counts.
    pub followers: (f64, f64),
    /// Log-uniform range of initial weekly engagement.
    pub engagement: (f64, f64),
    /// Fraction of pages given a score below 60.
    pub questionable_share: f64,
    /// Posts before this date carry no follower count.
    pub followers_from: Option<NaiveDate>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            pages: 50,
            start: NaiveDate::from_ymd_opt(2018, 1, 1).expect("valid date"),
            weeks: 104,
            posts_per_week: 3,
            coefficients: ModelCoefficients::published(),
            followers: (1e4, 5e6),
            engagement: (1e3, 1e5),
            questionable_share: 0.5,
            followers_from: None,
            seed: 0,
        }
    }
}

/// Size-independent coefficients (`beta1 = beta2 = 0`) for every timescale.
pub fn gibrat_coefficients(mu: f64, b: f64, c: f64, k: f64) -> ModelCoefficients {
    let mut m = ModelCoefficients::new();
    for t in [Timescale::Weekly, Timescale::Monthly, Timescale::Quarterly] {
        for (p, beta0) in [(Parameter::Mu, mu), (Parameter::B, b), (Parameter::C, c), (Parameter::K, k)] {
            let line = ParamLine {
                beta0,
                beta1: 0.0,
                beta2: p.uses_engagement().then_some(0.0),
            };
            m.insert(p, t, line).expect("valid line");
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageTruth {
    pub page_id: String,
    pub initial_followers: f64,
    pub initial_engagement: f64,
    pub final_followers: f64,
    pub final_engagement: f64,
    pub score: f64,
    /// Weeks in which a parameter hit its floor.
    pub clamped_weeks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truth {
    pub seed: u64,
    pub timescale: &'static str,
    pub weeks: usize,
    pub start: String,
    pub pages: Vec<PageTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub posts: Vec<PostRecord>,
    pub pages: Vec<PageMeta>,
    pub truth: Truth,
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    if cfg.pages == 0 || cfg.weeks == 0 || cfg.posts_per_week == 0 {
        return Err(AppError::input("pages, weeks and posts per week must all be positive"));
    }
    let ranges_ok = [cfg.followers, cfg.engagement]
        .iter()
        .all(|(lo, hi)| *lo > 0.0 && lo <= hi && hi.is_finite());
    if !ranges_ok || !(0.0..=1.0).contains(&cfg.questionable_share) {
        return Err(AppError::input("invalid size ranges or questionable share"));
    }
    if !cfg.coefficients.covers(Timescale::Weekly) {
        return Err(AppError::input("coefficients do not cover the weekly timescale"));
    }
    let start = Window::containing(cfg.start, Timescale::Weekly).start;
    let mut out = SynthOutput {
        posts: Vec::new(),
        pages: Vec::with_capacity(cfg.pages),
        truth: Truth {
            seed: cfg.seed,
            timescale: "W",
            weeks: cfg.weeks,
            start: start.to_string(),
            pages: Vec::with_capacity(cfg.pages),
        },
    };
    let width = cfg.pages.to_string().len().max(3);
    for i in 0..cfg.pages {
        let id = format!("p{i:0width$}");
        let mut rng = substream(cfg.seed, i as u64);
        let (meta, truth) = generate_page(cfg, &id, start, &mut rng, &mut out.posts)?;
        out.pages.push(meta);
        out.truth.pages.push(truth);
    }
    Ok(out)
}

fn log_uniform(rng: &mut StreamRng, (lo, hi): (f64, f64)) -> f64 {
    (lo.ln() + open_unit(rng) * (hi.ln() - lo.ln())).exp()
}

fn generate_page(
    cfg: &SynthConfig,
    id: &str,
    start: NaiveDate,
    rng: &mut StreamRng,
    posts: &mut Vec<PostRecord>,
) -> Result<(PageMeta, PageTruth)> {
    let f0 = log_uniform(rng, cfg.followers);
    let e0 = log_uniform(rng, cfg.engagement);
    let questionable = open_unit(rng) < cfg.questionable_share;
    let score = if questionable {
        (open_unit(rng) * 600.0).floor() / 10.0
    } else {
        60.0 + (open_unit(rng) * 400.0).floor() / 10.0
    };
    let age_days = (open_unit(rng) * 3650.0) as u64;
    let meta = PageMeta {
        page_id: id.into(),
        name: format!("Synthetic page {id}"),
        created_at: start - Days::new(age_days),
        newsguard_score: Some(score),
        language: Some("en".into()),
    };

    let (mut f, mut e) = (f0, e0);
    let mut clamped_weeks = 0;
    for week in 0..cfg.weeks {
        let monday = start + Days::new(7 * week as u64);
        let midnight = monday.and_hms_opt(0, 0, 0).expect("valid time").and_utc();
        let mut offsets: Vec<i64> = (0..cfg.posts_per_week)
            .map(|_| (open_unit(rng) * 7.0 * 86_400.0) as i64)
            .collect();
        offsets.sort_unstable();
        let weights: Vec<f64> = (0..cfg.posts_per_week).map(|_| open_unit(rng)).collect();
        let total = e.round().min(u64::MAX as f64) as u64;
        let followers = f.round().min(u64::MAX as f64) as u64;
        let wsum: f64 = weights.iter().sum();
        let mut left = total;
        for (j, (off, w)) in offsets.iter().zip(&weights).enumerate() {
            let share = if j + 1 == cfg.posts_per_week {
                left
            } else {
                ((total as f64 * w / wsum).floor() as u64).min(left)
            };
            left -= share;
            let timestamp = midnight + TimeDelta::seconds(*off);
            let likes = share * 7 / 10;
            let comments = share / 5;
            let has_followers = cfg.followers_from.is_none_or(|d| timestamp.date_naive() >= d);
            let post = PostRecord::new(
                id,
                format!("{id}-{week}-{j}"),
                timestamp,
                [Some(likes), Some(comments), Some(share - likes - comments)],
                share,
                has_followers.then_some(followers),
            )
            .expect("components add up");
            posts.push(post);
        }

        let (laplace, lf) = eval_mu_b(&cfg.coefficients, Timescale::Weekly, f, e)?;
        let (burr, bf) = eval_c_k(&cfg.coefficients, Timescale::Weekly, f)?;
        clamped_weeks += usize::from(lf.b || bf.c || bf.k);
        e *= sample_laplace(laplace, rng).exp();
        f *= sample_burr(burr, rng);
    }
    let truth = PageTruth {
        page_id: id.into(),
        initial_followers: f0,
        initial_engagement: e0,
        final_followers: f,
        final_engagement: e,
        score,
        clamped_weeks,
    };
    Ok((meta, truth))
}

/// Writes `posts.<csv|jsonl>`, `pages.csv`, `truth.json` and the generating
/// `coefficients.csv` into `dir`.
pub fn write_synth(dir: &Path, out: &SynthOutput, coefficients: &ModelCoefficients, format: Format) -> Result<()> {
    let posts_name = match format {
        Format::Csv => "posts.csv",
        Format::Jsonl => "posts.jsonl",
    };
    let path = dir.join(posts_name);
    write_posts(create(&path)?, &out.posts, format).map_err(|e| AppError::io(&path, e))?;
    let path = dir.join("pages.csv");
    write_pages(create(&path)?, &out.pages).map_err(|e| AppError::io(&path, e))?;
    let path = dir.join("coefficients.csv");
    write_coefficients(create(&path)?, coefficients).map_err(|e| AppError::io(&path, e))?;
    let path = dir.join("truth.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &out.truth).map_err(|e| AppError::io(&path, e.into()))?;
    std::io::Write::write_all(&mut w, b"\n").map_err(|e| AppError::io(&path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| AppError::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pagegrowth_core::aggregate::{aggregate_dataset, FollowerRule};
    use pagegrowth_core::record::build_dataset;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            pages: 6,
            weeks: 20,
            seed,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(&small(4)).unwrap(), generate(&small(4)).unwrap());
        assert_ne!(generate(&small(4)).unwrap().posts, generate(&small(5)).unwrap().posts);
    }

    #[test]
    fn weekly_totals_match_latent_engagement() {
        let out = generate(&small(1)).unwrap();
        let pages = out.pages.iter().map(|p| (p.page_id.clone(), p.clone())).collect();
        let (ds, rejected) = build_dataset(out.posts.clone(), pages).unwrap();
        assert!(rejected.is_empty());
        let series = aggregate_dataset(&ds, Timescale::Weekly, FollowerRule::default());
        for t in &out.truth.pages {
            let s = &series[&t.page_id];
            assert_eq!(s.windows.len(), 20);
            assert_eq!(s.windows[0].engagement, t.initial_engagement.round() as u64);
            assert_eq!(s.windows[0].followers, Some(t.initial_followers.round() as u64));
            assert_eq!(s.windows[0].window.start, NaiveDate::from_ymd_opt(2018, 1, 1).unwrap());
        }
    }

    #[test]
    fn follower_cutoff() {
        let cfg = SynthConfig {
            followers_from: NaiveDate::from_ymd_opt(2018, 2, 1),
            ..small(2)
        };
        let out = generate(&cfg).unwrap();
        for p in &out.posts {
            let before = p.timestamp.date_naive() < NaiveDate::from_ymd_opt(2018, 2, 1).unwrap();
            assert_eq!(p.followers_at_posting.is_none(), before);
        }
    }

    #[test]
    fn infeasible_configs() {
        assert!(generate(&SynthConfig { pages: 0, ..small(0) }).is_err());
        assert!(generate(&SynthConfig { followers: (0.0, 1.0), ..small(0) }).is_err());
    }
}
