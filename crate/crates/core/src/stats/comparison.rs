//! Test drivers built on the Mann-Whitney test: class matrices, the
//! growth-symmetry check and the reliable/questionable comparison.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::mann_whitney::{mann_whitney, Alternative, TestResult};
use crate::aggregate::AggregatedSeries;
use crate::calendar::Timescale;
use crate::error::{Error, Result};
use crate::growth::{growth_samples, Metric};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCell {
    /// Smaller size class (the one tested for faster growth).
    pub row: String,
    pub col: String,
    pub result: core::result::Result<TestResult, String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassMatrix {
    pub one_sided: Vec<MatrixCell>,
    pub two_sided: Vec<MatrixCell>,
}

impl ClassMatrix {
    pub fn cells(&self) -> impl Iterator<Item = &MatrixCell> {
        self.one_sided.iter().chain(&self.two_sided)
    }
}

/// Tests every pair of bins. `bins` are ordered from the smallest to the
/// largest class; for each pair the one-sided test asks whether the smaller
/// class grows faster, and a two-sided test is run alongside.
pub fn class_test_matrix(bins: &[(String, Vec<f64>)]) -> Result<ClassMatrix> {
    if bins.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: bins.len(),
        });
    }
    let mut m = ClassMatrix::default();
    for (i, (small, xs)) in bins.iter().enumerate() {
        for (large, ys) in &bins[i + 1..] {
            for alt in [Alternative::Greater, Alternative::TwoSided] {
                let cell = MatrixCell {
                    row: small.clone(),
                    col: large.clone(),
                    result: mann_whitney(xs, ys, alt).map_err(|e| e.to_string()),
                };
                match alt {
                    Alternative::Greater => m.one_sided.push(cell),
                    Alternative::TwoSided => m.two_sided.push(cell),
                }
            }
        }
    }
    Ok(m)
}

pub const MIN_SYMMETRY_SAMPLES: usize = 100;

/// Two-sided test of `{g}` against `{-g}`; a small p-value indicates that
/// the log growth distribution is not symmetric about zero.
pub fn detailed_balance_check(log_growth: &[f64]) -> Result<TestResult> {
    if log_growth.len() < MIN_SYMMETRY_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SYMMETRY_SAMPLES,
            got: log_growth.len(),
        });
    }
    let mirrored: Vec<f64> = log_growth.iter().map(|g| -g).collect();
    mann_whitney(log_growth, &mirrored, Alternative::TwoSided)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quantity {
    Engagement,
    EngagementGrowth,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Engagement => "engagement",
            Quantity::EngagementGrowth => "engagement_growth",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityRow {
    pub timescale: Timescale,
    pub quantity: Quantity,
    pub result: core::result::Result<TestResult, String>,
}

/// For each timescale present, one-sided tests that the reliable cohort has
/// higher window engagement and higher engagement log growth than the
/// questionable one.
pub fn reliability_comparison(
    questionable: &[AggregatedSeries],
    reliable: &[AggregatedSeries],
) -> Result<Vec<ReliabilityRow>> {
    if questionable.is_empty() || reliable.is_empty() {
        return Err(Error::EmptySample);
    }
    #[derive(Default)]
    struct Pools {
        engagement: [Vec<f64>; 2],
        growth: [Vec<f64>; 2],
    }
    let mut by_scale: BTreeMap<Timescale, Pools> = BTreeMap::new();
    for (side, cohort) in [(0, reliable), (1, questionable)] {
        for series in cohort {
            let pools = by_scale.entry(series.timescale).or_default();
            pools.engagement[side].extend(series.windows.iter().map(|w| w.engagement as f64));
            let (samples, _) = growth_samples(series, Metric::Engagement);
            pools.growth[side].extend(samples.iter().map(|s| s.log_growth));
        }
    }
    let mut rows = Vec::new();
    for (timescale, pools) in by_scale {
        for (quantity, [rel, que]) in [
            (Quantity::Engagement, pools.engagement),
            (Quantity::EngagementGrowth, pools.growth),
        ] {
            rows.push(ReliabilityRow {
                timescale,
                quantity,
                result: mann_whitney(&rel, &que, Alternative::Greater).map_err(|e| e.to_string()),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::WindowStat;
    use crate::calendar::Window;
    use crate::rng::{open_unit, substream, StreamRng};
    use crate::stats::{laplace_quantile, LaplaceParams};
    use alloc::vec;

    fn laplace(n: usize, mu: f64, rng: &mut StreamRng) -> Vec<f64> {
        let p = LaplaceParams::new(mu, 1.0).unwrap();
        (0..n).map(|_| laplace_quantile(open_unit(rng), p)).collect()
    }

    #[test]
    fn pair_count() {
        let mut rng = substream(1, 0);
        let bins: Vec<(String, Vec<f64>)> = (0..4).map(|i| (alloc::format!("c{i}"), laplace(30, 0.0, &mut rng))).collect();
        let m = class_test_matrix(&bins).unwrap();
        assert_eq!((m.one_sided.len(), m.two_sided.len()), (6, 6));
        assert!(m.one_sided.iter().all(|c| c.row < c.col));
        assert!(class_test_matrix(&bins[..1]).is_err());
    }

    #[test]
    fn empty_bin_becomes_absent_cell() {
        let bins = vec![("a".to_string(), vec![1.0, 2.0]), ("b".to_string(), vec![])];
        let m = class_test_matrix(&bins).unwrap();
        assert!(m.cells().all(|c| c.result.is_err()));
    }

    #[test]
    fn null_calibration_per_cell() {
        let mut rejections = 0;
        let mut cells = 0;
        for rep in 0..200 {
            let mut rng = substream(100 + rep, 0);
            let bins: Vec<(String, Vec<f64>)> =
                (0..4).map(|i| (alloc::format!("c{i}"), laplace(200, 0.0, &mut rng))).collect();
            for c in class_test_matrix(&bins).unwrap().one_sided {
                cells += 1;
                rejections += usize::from(c.result.unwrap().p_value < 0.05);
            }
        }
        let rate = rejections as f64 / cells as f64;
        assert!((0.03..=0.07).contains(&rate), "{rate}");
    }

    #[test]
    fn shifted_smallest_class_is_detected() {
        let mut rng = substream(5, 0);
        let mut bins = vec![("small".to_string(), laplace(10_000, 0.2, &mut rng))];
        for i in 0..3 {
            bins.push((alloc::format!("large{i}"), laplace(10_000, 0.0, &mut rng)));
        }
        let m = class_test_matrix(&bins).unwrap();
        for c in m.one_sided.iter().filter(|c| c.row == "small") {
            assert!(c.result.as_ref().unwrap().p_value < 0.01);
        }
    }

    #[test]
    fn perfect_symmetry() {
        let g: Vec<f64> = (1..=100).flat_map(|i| [i as f64 * 0.01, -(i as f64) * 0.01]).collect();
        assert_eq!(detailed_balance_check(&g).unwrap().p_value, 1.0);
        assert!(detailed_balance_check(&g[..50]).is_err());
    }

    #[test]
    fn asymmetry_is_detected() {
        let mut rng = substream(9, 0);
        assert!(detailed_balance_check(&laplace(100_000, 0.3, &mut rng)).unwrap().p_value < 0.001);
        assert!(detailed_balance_check(&laplace(100_000, 0.0, &mut rng)).unwrap().p_value > 0.01);
    }

    fn cohort(pages: usize, drift: f64, seed: u64) -> Vec<AggregatedSeries> {
        let start = chrono::NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        let p = LaplaceParams::new(drift, 0.3).unwrap();
        (0..pages)
            .map(|i| {
                let mut rng = substream(seed, i as u64);
                let mut w = Window::containing(start, Timescale::Quarterly);
                let mut e = 10_000.0;
                let mut windows = Vec::new();
                for _ in 0..20 {
                    windows.push(WindowStat {
                        window: w,
                        engagement: libm::round(e) as u64,
                        mean_engagement: e,
                        post_count: 1,
                        followers: None,
                    });
                    e *= libm::exp(laplace_quantile(open_unit(&mut rng), p));
                    w = w.next();
                }
                AggregatedSeries {
                    page_id: alloc::format!("{seed}-{i}"),
                    timescale: Timescale::Quarterly,
                    windows,
                }
            })
            .collect()
    }

    #[test]
    fn reliability_drift_is_detected() {
        let rows = reliability_comparison(&cohort(131, 0.0, 1), &cohort(131, 0.05, 2)).unwrap();
        let growth = rows.iter().find(|r| r.quantity == Quantity::EngagementGrowth).unwrap();
        assert!(growth.result.as_ref().unwrap().p_value < 0.01);
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn reliability_null_is_not_significant() {
        let mut significant = 0;
        for rep in 0..20 {
            let rows = reliability_comparison(&cohort(40, 0.0, 10 + 2 * rep), &cohort(40, 0.0, 11 + 2 * rep)).unwrap();
            let growth = rows.iter().find(|r| r.quantity == Quantity::EngagementGrowth).unwrap();
            significant += usize::from(growth.result.as_ref().unwrap().p_value < 0.05);
        }
        assert!(significant <= 4, "{significant}");
    }

    #[test]
    fn reliability_needs_both_cohorts() {
        assert_eq!(reliability_comparison(&[], &cohort(2, 0.0, 1)), Err(Error::EmptySample));
    }
}
