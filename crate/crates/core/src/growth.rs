//! Growth-rate samples, percentile trimming and size classes.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::NaiveDate;

use crate::aggregate::{AggregatedSeries, WindowStat};
use crate::calendar::Timescale;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Followers,
    Engagement,
    MeanEngagement,
}

impl Metric {
    pub fn code(self) -> &'static str {
        match self {
            Metric::Followers => "followers",
            Metric::Engagement => "engagement",
            Metric::MeanEngagement => "mean_engagement",
        }
    }

    fn value(self, w: &WindowStat) -> Option<f64> {
        match self {
            Metric::Followers => w.followers.map(|f| f as f64),
            Metric::Engagement => Some(w.engagement as f64),
            Metric::MeanEngagement => (w.post_count > 0).then_some(w.mean_engagement),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "followers" => Ok(Metric::Followers),
            "engagement" => Ok(Metric::Engagement),
            "mean_engagement" => Ok(Metric::MeanEngagement),
            other => Err(Error::InvalidArgument(alloc::format!("unknown metric {other:?}"))),
        }
    }
}

/// One window-to-window growth observation. Covariates and `window_start`
/// refer to the earlier window of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSample {
    pub page_id: String,
    pub timescale: Timescale,
    pub window_start: NaiveDate,
    pub metric: Metric,
    pub gross_growth: f64,
    pub log_growth: f64,
    pub prior_followers: Option<u64>,
    pub prior_engagement: u64,
}

/// Window pairs that produced no sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SkipReport {
    /// Adjacent pairs where either value was zero or missing.
    pub degenerate: usize,
    /// Consecutive non-empty windows separated by at least one empty window.
    pub gaps: usize,
}

impl SkipReport {
    pub fn merge(&mut self, other: SkipReport) {
        self.degenerate += other.degenerate;
        self.gaps += other.gaps;
    }
}

/// Growth samples over calendar-adjacent windows with positive values on
/// both sides.
pub fn growth_samples(series: &AggregatedSeries, metric: Metric) -> (Vec<GrowthSample>, SkipReport) {
    let mut out = Vec::new();
    let mut skips = SkipReport::default();
    for pair in series.windows.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        if !prev.window.is_adjacent_to(&next.window) {
            skips.gaps += 1;
            continue;
        }
        match (metric.value(prev), metric.value(next)) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => {
                let gross = b / a;
                out.push(GrowthSample {
                    page_id: series.page_id.clone(),
                    timescale: series.timescale,
                    window_start: prev.window.start,
                    metric,
                    gross_growth: gross,
                    log_growth: libm::log(gross),
                    prior_followers: prev.followers,
                    prior_engagement: prev.engagement,
                });
            }
            _ => skips.degenerate += 1,
        }
    }
    (out, skips)
}

/// Below this many values percentile trimming is skipped.
pub const MIN_TRIM_SAMPLES: usize = 20;

/// Percentile of sorted data by linear interpolation between order
/// statistics at rank `p (n - 1) + 1` (`p` in `[0, 1]`).
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_owned();
    v.sort_by(f64::total_cmp);
    v
}

/// `[q_lo, q_hi]` for percentages `lo_pct < hi_pct` in `[0, 100]`.
pub fn percentile_bounds(values: &[f64], lo_pct: f64, hi_pct: f64) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let sorted = sorted_copy(values);
    Some((
        percentile_sorted(&sorted, lo_pct / 100.0),
        percentile_sorted(&sorted, hi_pct / 100.0),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trimmed {
    pub values: Vec<f64>,
    /// Set when the input was too small to trim and passed through unchanged.
    pub small_input: bool,
}

/// Keeps the values between the `lo_pct` and `hi_pct` percentiles
/// (inclusive), preserving input order.
pub fn trim(values: &[f64], lo_pct: f64, hi_pct: f64) -> Trimmed {
    if values.len() < MIN_TRIM_SAMPLES {
        return Trimmed {
            values: values.to_owned(),
            small_input: !values.is_empty(),
        };
    }
    let (lo, hi) = percentile_bounds(values, lo_pct, hi_pct).expect("non-empty");
    Trimmed {
        values: trim_to_bounds(values, lo, hi),
        small_input: false,
    }
}

pub fn trim_to_bounds(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    values.iter().copied().filter(|v| lo <= *v && *v <= hi).collect()
}

/// Follower-count interval `[lower, upper)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeClass {
    pub label: String,
    pub lower: u64,
    pub upper: u64,
}

impl SizeClass {
    pub fn new(label: impl Into<String>, lower: u64, upper: u64) -> Self {
        SizeClass {
            label: label.into(),
            lower,
            upper,
        }
    }

    pub fn contains(&self, followers: u64) -> bool {
        self.lower <= followers && followers < self.upper
    }
}

/// Disjoint size classes ordered by lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeScheme {
    classes: Vec<SizeClass>,
}

impl SizeScheme {
    pub fn new(mut classes: Vec<SizeClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidScheme("no classes".into()));
        }
        classes.sort_by_key(|c| c.lower);
        for c in &classes {
            if c.lower >= c.upper {
                return Err(Error::InvalidScheme(alloc::format!("class {} is empty", c.label)));
            }
        }
        for pair in classes.windows(2) {
            if pair[0].upper > pair[1].lower {
                return Err(Error::InvalidScheme(alloc::format!(
                    "classes {} and {} overlap",
                    pair[0].label,
                    pair[1].label
                )));
            }
        }
        Ok(SizeScheme { classes })
    }

    /// 10K-50K, 50K-150K, 150K-500K and 500K-5M followers.
    pub fn standard() -> Self {
        SizeScheme::new(alloc::vec![
            SizeClass::new("10K-50K", 10_000, 50_000),
            SizeClass::new("50K-150K", 50_000, 150_000),
            SizeClass::new("150K-500K", 150_000, 500_000),
            SizeClass::new("500K-5M", 500_000, 5_000_000),
        ])
        .expect("standard scheme is valid")
    }

    pub fn classes(&self) -> &[SizeClass] {
        &self.classes
    }
}

pub fn assign_follower_class(followers: u64, scheme: &SizeScheme) -> Option<&SizeClass> {
    scheme.classes.iter().find(|c| c.contains(followers))
}

/// Groups samples by the class of their prior follower count, in scheme
/// order. Samples without a follower count or outside every class are
/// dropped.
pub fn bin_by_follower_class<'a>(
    samples: &[GrowthSample],
    scheme: &'a SizeScheme,
) -> Vec<(&'a SizeClass, Vec<GrowthSample>)> {
    let mut bins: Vec<(&SizeClass, Vec<GrowthSample>)> =
        scheme.classes.iter().map(|c| (c, Vec::new())).collect();
    for s in samples {
        let Some(f) = s.prior_followers else { continue };
        if let Some(i) = scheme.classes.iter().position(|c| c.contains(f)) {
            bins[i].1.push(s.clone());
        }
    }
    bins
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuartileBins {
    pub bins: [Vec<GrowthSample>; 4],
    /// Upper-inclusive cut points between consecutive bins.
    pub cutpoints: [f64; 3],
    /// False when the input was too small for percentile trimming.
    pub trimmed: bool,
}

/// Splits samples into quartiles of prior engagement, after trimming the
/// prior engagement to its 5th-95th percentile range.
pub fn engagement_quartile_bins(samples: &[GrowthSample]) -> Result<QuartileBins> {
    quartile_bins_trimmed(samples, 5.0, 95.0)
}

/// [`engagement_quartile_bins`] with other trimming percentiles.
pub fn quartile_bins_trimmed(samples: &[GrowthSample], lo_pct: f64, hi_pct: f64) -> Result<QuartileBins> {
    let priors: Vec<f64> = samples.iter().map(|s| s.prior_engagement as f64).collect();
    let trimmed = priors.len() >= MIN_TRIM_SAMPLES;
    let kept: Vec<&GrowthSample> = if trimmed {
        let (lo, hi) = percentile_bounds(&priors, lo_pct, hi_pct).expect("non-empty");
        samples
            .iter()
            .filter(|s| (lo..=hi).contains(&(s.prior_engagement as f64)))
            .collect()
    } else {
        samples.iter().collect()
    };
    let sorted = sorted_copy(&kept.iter().map(|s| s.prior_engagement as f64).collect::<Vec<_>>());
    let distinct = sorted.windows(2).filter(|w| w[0] != w[1]).count() + usize::from(!sorted.is_empty());
    if distinct < 4 {
        return Err(Error::DegenerateBinning);
    }
    let cutpoints = [
        percentile_sorted(&sorted, 0.25),
        percentile_sorted(&sorted, 0.50),
        percentile_sorted(&sorted, 0.75),
    ];
    let mut bins: [Vec<GrowthSample>; 4] = Default::default();
    for s in kept {
        let v = s.prior_engagement as f64;
        let idx = cutpoints.iter().take_while(|c| v > **c).count();
        bins[idx].push(s.clone());
    }
    Ok(QuartileBins {
        bins,
        cutpoints,
        trimmed,
    })
}

/// Splits a class at the median prior follower count; samples at or above
/// the median form the upper half.
pub fn split_class_by_median(samples: &[GrowthSample]) -> Result<(Vec<GrowthSample>, Vec<GrowthSample>)> {
    let with_followers: Vec<&GrowthSample> =
        samples.iter().filter(|s| s.prior_followers.is_some()).collect();
    if with_followers.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: with_followers.len(),
        });
    }
    let values: Vec<f64> = with_followers
        .iter()
        .map(|s| s.prior_followers.unwrap() as f64)
        .collect();
    let sorted = sorted_copy(&values);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateSample("all prior follower counts are equal"));
    }
    let median = percentile_sorted(&sorted, 0.5);
    let (upper, lower): (Vec<&GrowthSample>, Vec<&GrowthSample>) = with_followers
        .into_iter()
        .partition(|s| s.prior_followers.unwrap() as f64 >= median);
    Ok((
        lower.into_iter().cloned().collect(),
        upper.into_iter().cloned().collect(),
    ))
}
