//! Mann-Whitney U test.
//!
//! U is the count of pairs `(x_i, y_j)` with `x_i > y_j` (ties count one
//! half), obtained from the midrank sum of `x`. Tie-free samples with
//! `n1 * n2 <= EXACT_THRESHOLD` use the exact null distribution of U;
//! everything else the normal approximation with tie-corrected variance and
//! a 0.5 continuity correction.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use libm::{fabs, sqrt};

use crate::error::{Error, Result};
use crate::special::normal_sf;

pub const EXACT_THRESHOLD: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alternative {
    /// `x` is stochastically greater than `y`.
    Greater,
    TwoSided,
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::Greater => "greater",
            Alternative::TwoSided => "two-sided",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    NormalApprox,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::NormalApprox => "normal-approx",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub u_statistic: f64,
    pub p_value: f64,
    pub alternative: Alternative,
    pub n1: usize,
    pub n2: usize,
    pub method: Method,
}

pub fn mann_whitney(x: &[f64], y: &[f64], alternative: Alternative) -> Result<TestResult> {
    run(x, y, alternative, None)
}

/// Like [`mann_whitney`] with the method fixed. The exact method rejects
/// tied samples.
pub fn mann_whitney_with(x: &[f64], y: &[f64], alternative: Alternative, method: Method) -> Result<TestResult> {
    run(x, y, alternative, Some(method))
}

fn run(x: &[f64], y: &[f64], alternative: Alternative, forced: Option<Method>) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN in Mann-Whitney sample".into()));
    }
    let (n1, n2) = (x.len(), y.len());
    let ranked = midranks(x, y);
    let u = ranked.rank_sum_x - (n1 * (n1 + 1)) as f64 / 2.0;

    let method = forced.unwrap_or(if ranked.tie_term == 0.0 && n1 * n2 <= EXACT_THRESHOLD {
        Method::Exact
    } else {
        Method::NormalApprox
    });
    let p_value = match method {
        Method::Exact if ranked.tie_term != 0.0 => {
            return Err(Error::Domain("exact Mann-Whitney p needs tie-free samples".into()))
        }
        Method::Exact => exact_p(u, n1, n2, alternative),
        Method::NormalApprox => normal_p(u, n1, n2, ranked.tie_term, alternative),
    };
    Ok(TestResult {
        u_statistic: u,
        p_value: p_value.clamp(0.0, 1.0),
        alternative,
        n1,
        n2,
        method,
    })
}

struct Ranked {
    rank_sum_x: f64,
    /// Sum of `t^3 - t` over tie groups.
    tie_term: f64,
}

fn midranks(x: &[f64], y: &[f64]) -> Ranked {
    let mut pooled: Vec<(f64, bool)> = x
        .iter()
        .map(|v| (*v, true))
        .chain(y.iter().map(|v| (*v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum_x = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        // -0.0 and 0.0 are one tie group
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        let rank = (i + j + 1) as f64 / 2.0;
        rank_sum_x += rank * pooled[i..j].iter().filter(|e| e.1).count() as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    Ranked { rank_sum_x, tie_term }
}

/// Null frequencies of U for sample sizes `(n1, n2)`: entry `u` counts the
/// rank assignments with statistic `u`.
fn u_frequencies(n1: usize, n2: usize) -> Vec<u64> {
    // freq[i][j] holds the distribution for sizes (i, j), built from
    // f(i, j, u) = f(i - 1, j, u - j) + f(i, j - 1, u).
    let max_u = n1 * n2;
    let mut prev_row: Vec<Vec<u64>> = (0..=n2).map(|_| vec![1]).collect();
    for i in 1..=n1 {
        let mut row: Vec<Vec<u64>> = Vec::with_capacity(n2 + 1);
        row.push(vec![1]);
        for j in 1..=n2 {
            let mut f = vec![0u64; i * j + 1];
            for (u, c) in prev_row[j].iter().enumerate() {
                f[u + j] += c;
            }
            for (u, c) in row[j - 1].iter().enumerate() {
                f[u] += c;
            }
            row.push(f);
        }
        prev_row = row;
    }
    let out = prev_row.swap_remove(n2);
    debug_assert_eq!(out.len(), max_u + 1);
    out
}

fn exact_p(u: f64, n1: usize, n2: usize, alternative: Alternative) -> f64 {
    let freq = u_frequencies(n1, n2);
    let total: u64 = freq.iter().sum();
    let u = u as usize;
    let upper: u64 = freq[u..].iter().sum();
    let lower: u64 = freq[..=u].iter().sum();
    match alternative {
        Alternative::Greater => upper as f64 / total as f64,
        Alternative::TwoSided => (2.0 * upper.min(lower) as f64 / total as f64).min(1.0),
    }
}

fn normal_p(u: f64, n1: usize, n2: usize, tie_term: f64, alternative: Alternative) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    let n = a + b;
    let mean = a * b / 2.0;
    let var = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return 1.0;
    }
    let sd = sqrt(var);
    match alternative {
        Alternative::Greater => normal_sf((u - mean - 0.5) / sd),
        Alternative::TwoSided => (2.0 * normal_sf((fabs(u - mean) - 0.5) / sd)).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    /// Exact null distribution by listing every way to pick the x ranks.
    fn enumerate_u(n1: usize, n2: usize) -> Vec<u64> {
        let n = n1 + n2;
        let mut freq = vec![0u64; n1 * n2 + 1];
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n1 {
                continue;
            }
            let rank_sum: usize = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).sum();
            freq[rank_sum - n1 * (n1 + 1) / 2] += 1;
        }
        freq
    }

    #[test]
    fn frequencies_match_enumeration() {
        for n1 in 1..=6 {
            for n2 in 1..=6 {
                assert_eq!(u_frequencies(n1, n2), enumerate_u(n1, n2), "{n1} {n2}");
            }
        }
    }

    #[test]
    fn separated_samples() {
        let r = mann_whitney(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0], Alternative::Greater).unwrap();
        assert_eq!(r.u_statistic, 9.0);
        assert_eq!(r.method, Method::Exact);
        assert!((r.p_value - 0.05).abs() < 1e-15);
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::Greater).unwrap();
        assert_eq!(r.u_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = mann_whitney(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0], Alternative::TwoSided).unwrap();
        assert!((r.p_value - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identical_samples_two_sided() {
        let x = [1.0, 2.0, 2.0, 5.0, 7.0];
        let r = mann_whitney(&x, &x, Alternative::TwoSided).unwrap();
        assert_eq!(r.u_statistic, 12.5);
        assert_eq!(r.method, Method::NormalApprox);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn empty_sample() {
        assert_eq!(mann_whitney(&[], &[1.0], Alternative::Greater), Err(Error::EmptySample));
    }

    #[test]
    fn all_tied() {
        let r = mann_whitney(&[3.0; 4], &[3.0; 5], Alternative::Greater).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn large_samples_use_normal_approximation() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 + 0.5).collect();
        let y: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let r = mann_whitney(&x, &y, Alternative::Greater).unwrap();
        assert_eq!(r.method, Method::NormalApprox);
        // Reference value from scipy.stats.mannwhitneyu(method="asymptotic").
        assert!((r.u_statistic - 465.0).abs() < 1e-12);
        assert!((r.p_value - 0.41512764195559815).abs() < 1e-9, "{}", r.p_value);
    }

    #[test]
    fn forced_method() {
        let x: Vec<f64> = (0..20).map(|i| 2.0 * i as f64 + 0.7).collect();
        let y: Vec<f64> = (0..20).map(|i| 2.0 * i as f64).collect();
        let exact = mann_whitney_with(&x, &y, Alternative::Greater, Method::Exact).unwrap();
        let approx = mann_whitney_with(&x, &y, Alternative::Greater, Method::NormalApprox).unwrap();
        assert_eq!(mann_whitney(&x, &y, Alternative::Greater).unwrap(), exact);
        assert_eq!(approx.method, Method::NormalApprox);
        assert!((exact.p_value - approx.p_value).abs() < 0.01);
        assert!(mann_whitney_with(&[1.0, 2.0], &[2.0], Alternative::Greater, Method::Exact).is_err());
    }

    #[test]
    fn swapping_samples_complements_the_one_sided_p() {
        let x = [0.3, 1.9, 2.2, 5.1];
        let y = [0.1, 0.7, 1.2, 3.3, 4.0];
        let xy = mann_whitney(&x, &y, Alternative::Greater).unwrap();
        let yx = mann_whitney(&y, &x, Alternative::Greater).unwrap();
        assert_eq!(xy.u_statistic + yx.u_statistic, 20.0);
        let freq = u_frequencies(4, 5);
        let total: u64 = freq.iter().sum();
        let at = freq[xy.u_statistic as usize] as f64 / total as f64;
        assert!((xy.p_value + yx.p_value - 1.0 - at).abs() < 1e-12);
    }
}
