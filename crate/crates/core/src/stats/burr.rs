//! Burr (type XII) distribution with CDF `1 - (1 + x^c)^(-k)`.

use alloc::vec::Vec;

use libm::{exp, expm1, log, log1p};

use crate::error::{Error, Result};
use crate::optimize::NelderMead;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurrParams {
    pub c: f64,
    pub k: f64,
}

impl BurrParams {
    pub fn new(c: f64, k: f64) -> Result<Self> {
        if !(c > 0.0 && k > 0.0 && c.is_finite() && k.is_finite()) {
            return Err(Error::Domain(alloc::format!("invalid Burr parameters ({c}, {k})")));
        }
        Ok(BurrParams { c, k })
    }
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + log1p(exp(-t))
    } else {
        log1p(exp(t))
    }
}

/// CDF evaluated from `ln x`.
fn cdf_from_log(ln_x: f64, p: BurrParams) -> f64 {
    -expm1(-p.k * softplus(p.c * ln_x))
}

pub fn burr_cdf(x: f64, p: BurrParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(alloc::format!("Burr CDF needs x > 0, got {x}")));
    }
    Ok(cdf_from_log(log(x), p))
}

/// `ln Q(u)` where `Q` is the quantile function.
fn log_quantile(u: f64, p: BurrParams) -> f64 {
    // (1 - u)^(-1/k) - 1 = expm1(-ln(1 - u) / k)
    let a = -log1p(-u) / p.k;
    // ln(expm1(a)) = a + ln(1 - e^-a)
    let ln_expm1 = if a > 1.0 { a + log1p(-exp(-a)) } else { log(expm1(a)) };
    ln_expm1 / p.c
}

/// Inverse CDF `((1 - u)^(-1/k) - 1)^(1/c)` for `u` in (0, 1).
pub fn burr_quantile(u: f64, p: BurrParams) -> f64 {
    exp(log_quantile(u, p))
}

pub fn burr_median(p: BurrParams) -> f64 {
    burr_quantile(0.5, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurrFit {
    pub params: BurrParams,
    /// Sum of squared CDF deviations at the optimum.
    pub objective: f64,
    pub iterations: usize,
}

pub const MIN_BURR_SAMPLES: usize = 50;

const SIMPLEX: NelderMead = NelderMead {
    ftol: 1e-10,
    xtol: 1e-7,
    max_iter: 500,
    initial_step: 0.2,
};

/// Least-squares fit of the Burr CDF to the empirical CDF (plotting
/// positions `i / (n + 1)`), searched by a simplex over `(ln c, ln k)`.
pub fn fit_burr(samples: &[f64]) -> Result<BurrFit> {
    if samples.len() < MIN_BURR_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_BURR_SAMPLES,
            got: samples.len(),
        });
    }
    if let Some(bad) = samples.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::Domain(alloc::format!("Burr fit needs positive samples, got {bad}")));
    }
    let mut ln_x: Vec<f64> = samples.iter().map(|x| log(*x)).collect();
    ln_x.sort_by(f64::total_cmp);
    if ln_x[0] == ln_x[ln_x.len() - 1] {
        return Err(Error::DegenerateSample("all samples are equal"));
    }
    let n = ln_x.len() as f64;
    let objective = |theta: &[f64; 2]| {
        let p = BurrParams {
            c: exp(theta[0]),
            k: exp(theta[1]),
        };
        ln_x.iter()
            .enumerate()
            .map(|(i, lx)| {
                let d = (i + 1) as f64 / (n + 1.0) - cdf_from_log(*lx, p);
                d * d
            })
            .sum::<f64>()
    };
    let start = quantile_start(&ln_x)?;
    let m = SIMPLEX.minimize(objective, [log(start.c), log(start.k)]);
    let (c, k) = (exp(m.point[0]), exp(m.point[1]));
    if !m.converged {
        return Err(Error::NonConvergence {
            c,
            k,
            objective: m.value,
            iterations: m.iterations,
        });
    }
    Ok(BurrFit {
        params: BurrParams::new(c, k)?,
        objective: m.value,
        iterations: m.iterations,
    })
}

/// Starting point matching the sample quartiles of `ln x`: the ratio of
/// the upper to the lower quartile gap depends on `k` alone, and `c` then
/// scales the interquartile range.
fn quantile_start(sorted_ln_x: &[f64]) -> Result<BurrParams> {
    use crate::growth::percentile_sorted;
    let q = [0.25, 0.5, 0.75].map(|p| percentile_sorted(sorted_ln_x, p));
    if !(q[0] < q[1] && q[1] < q[2]) {
        return Err(Error::DegenerateSample("zero quartile spread"));
    }
    let target = (q[2] - q[1]) / (q[1] - q[0]);
    let unit = |k: f64| BurrParams { c: 1.0, k };
    let ratio = |ln_k: f64| {
        let p = unit(exp(ln_k));
        let w = [0.25, 0.5, 0.75].map(|u| log_quantile(u, p));
        (w[2] - w[1]) / (w[1] - w[0])
    };
    // The ratio falls from about 1.71 (k -> 0) to about 0.79 (k -> inf).
    let (mut lo, mut hi) = (-12.0_f64, 12.0_f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = exp(0.5 * (lo + hi));
    let w = [0.25, 0.75].map(|u| log_quantile(u, unit(k)));
    let c = (w[1] - w[0]) / (q[2] - q[0]);
    BurrParams::new(c, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{open_unit, substream};

    fn draws(p: BurrParams, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = substream(seed, 0);
        (0..n).map(|_| burr_quantile(open_unit(&mut rng), p)).collect()
    }

    #[test]
    fn cdf_values() {
        for c in [0.5, 2.0, 17.0] {
            assert!((burr_cdf(1.0, BurrParams::new(c, 1.0).unwrap()).unwrap() - 0.5).abs() < 1e-15);
        }
        let p = BurrParams::new(1.0, 1.0).unwrap();
        assert!((burr_cdf(3.0, p).unwrap() - 0.75).abs() < 1e-15);
        assert!(burr_cdf(0.0, p).is_err());
        assert!(burr_cdf(-1.0, p).is_err());
    }

    #[test]
    fn cdf_limits_and_monotonicity() {
        let p = BurrParams::new(3.0, 2.0).unwrap();
        assert!(burr_cdf(1e-12, p).unwrap() < 1e-30);
        assert_eq!(burr_cdf(1e12, p).unwrap(), 1.0);
        let mut prev = 0.0;
        for i in 1..2000 {
            let v = burr_cdf(i as f64 * 0.005, p).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn median_maps_to_half() {
        for (c, k) in [(3.0, 2.0), (0.7, 0.2), (8420.469, 0.18)] {
            let p = BurrParams::new(c, k).unwrap();
            let closed_form = libm::pow(libm::pow(2.0, 1.0 / k) - 1.0, 1.0 / c);
            assert!((burr_median(p) / closed_form - 1.0).abs() < 1e-12);
            // Bisection on the CDF as an independent inversion.
            let (mut lo, mut hi) = (1e-9, 1e9);
            for _ in 0..400 {
                let mid = libm::sqrt(lo * hi);
                if burr_cdf(mid, p).unwrap() < 0.5 { lo = mid } else { hi = mid }
            }
            assert!((lo / closed_form - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cdf_inverts_quantile_on_grid() {
        for c in [0.5, 1.0, 3.0, 10.0, 1e3] {
            for k in [0.1, 0.5, 1.0, 2.0] {
                let p = BurrParams::new(c, k).unwrap();
                for i in 1..1000 {
                    let u = i as f64 / 1000.0;
                    let back = burr_cdf(burr_quantile(u, p), p).unwrap();
                    assert!((back - u).abs() < 1e-9, "c={c} k={k} u={u} back={back}");
                }
            }
        }
    }

    #[test]
    fn recovers_parameters() {
        let truth = BurrParams::new(3.0, 2.0).unwrap();
        let fit = fit_burr(&draws(truth, 20_000, 3)).unwrap();
        assert!((fit.params.c / 3.0 - 1.0).abs() < 0.05, "{fit:?}");
        assert!((fit.params.k / 2.0 - 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn weekly_magnitude_median() {
        let truth = BurrParams::new(8420.469, 0.18).unwrap();
        let fit = fit_burr(&draws(truth, 20_000, 5)).unwrap();
        let (m_fit, m_true) = (burr_median(fit.params), burr_median(truth));
        assert!((m_fit / m_true - 1.0).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_burr(&[2.0; 100]), Err(Error::DegenerateSample(_))));
        assert!(matches!(fit_burr(&[1.0; 10]), Err(Error::InsufficientData { .. })));
        let mut v = draws(BurrParams::new(2.0, 1.0).unwrap(), 100, 1);
        v[7] = 0.0;
        assert!(matches!(fit_burr(&v), Err(Error::Domain(_))));
    }
}
