use libm::{exp, fabs, log, sqrt};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceParams {
    pub mu: f64,
    pub b: f64,
}

impl LaplaceParams {
    pub fn new(mu: f64, b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite() && mu.is_finite()) {
            return Err(Error::Domain(alloc::format!("invalid Laplace parameters ({mu}, {b})")));
        }
        Ok(LaplaceParams { mu, b })
    }
}

/// Moment calibration: `mu` is the sample mean and `b` the sample standard
/// deviation over `sqrt(2)`.
pub fn fit_laplace(samples: &[f64]) -> Result<LaplaceParams> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSample("fewer than two observations"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite observation".into()));
    }
    let (mean, sd) = super::mean_sd(samples);
    if sd == 0.0 {
        return Err(Error::DegenerateSample("zero variance"));
    }
    Ok(LaplaceParams {
        mu: mean,
        b: sd / sqrt(2.0),
    })
}

pub fn laplace_pdf(x: f64, p: LaplaceParams) -> f64 {
    exp(-fabs(x - p.mu) / p.b) / (2.0 * p.b)
}

pub fn laplace_cdf(x: f64, p: LaplaceParams) -> f64 {
    let z = (x - p.mu) / p.b;
    if z < 0.0 {
        0.5 * exp(z)
    } else {
        1.0 - 0.5 * exp(-z)
    }
}

/// Inverse CDF, `mu - b sgn(u - 1/2) ln(1 - 2|u - 1/2|)` for `u` in (0, 1).
pub fn laplace_quantile(u: f64, p: LaplaceParams) -> f64 {
    let d = u - 0.5;
    let sign = if d < 0.0 { -1.0 } else if d > 0.0 { 1.0 } else { 0.0 };
    p.mu - p.b * sign * log(1.0 - 2.0 * fabs(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{open_unit, substream};
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn moment_identity() {
        // mean 0, sd sqrt(2)
        let p = fit_laplace(&[-1.0, 1.0, -1.0, 1.0, 0.0]).unwrap();
        let expected_b = sqrt(4.0 / 4.0) / sqrt(2.0);
        assert_eq!(p.mu, 0.0);
        assert!((p.b - expected_b).abs() < 1e-15);
        let p = fit_laplace(&[-1.0, 1.0]).unwrap();
        assert!((p.b - 1.0).abs() < 1e-15);
        let p = fit_laplace(&[0.2, 0.8]).unwrap();
        assert!((p.mu - 0.5).abs() < 1e-15 && (p.b - 0.3).abs() < 1e-15);
    }

    #[test]
    fn degenerate_samples() {
        assert!(fit_laplace(&[1.0]).is_err());
        assert_eq!(fit_laplace(&[2.0, 2.0, 2.0]), Err(Error::DegenerateSample("zero variance")));
    }

    #[test]
    fn monte_carlo_recovery() {
        let truth = LaplaceParams::new(0.2, 0.7).unwrap();
        let mut rng = substream(11, 0);
        let draws: Vec<f64> = (0..100_000).map(|_| laplace_quantile(open_unit(&mut rng), truth)).collect();
        let fit = fit_laplace(&draws).unwrap();
        assert!((fit.mu - 0.2).abs() < 0.01, "{fit:?}");
        assert!((fit.b - 0.7).abs() < 0.01, "{fit:?}");
    }

    #[test]
    fn density_values() {
        let p = LaplaceParams::new(0.3, 1.0).unwrap();
        assert_eq!(laplace_pdf(0.3, p), 0.5);
        assert!((laplace_pdf(1.3, p) - 0.183_940).abs() < 1e-6);
        assert_eq!(laplace_quantile(0.5, p), 0.3);
    }

    #[test]
    fn density_integrates_to_one() {
        // Composite Simpson on each side of the kink, mu +- 40b.
        let p = LaplaceParams::new(-0.4, 0.25).unwrap();
        let simpson = |a: f64, b: f64, n: usize| {
            let h = (b - a) / n as f64;
            let mut s = laplace_pdf(a, p) + laplace_pdf(b, p);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * laplace_pdf(a + i as f64 * h, p);
            }
            s * h / 3.0
        };
        let total = simpson(p.mu - 40.0 * p.b, p.mu, 20_000) + simpson(p.mu, p.mu + 40.0 * p.b, 20_000);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    proptest! {
        #[test]
        fn symmetric_density(mu in -5.0f64..5.0, b in 0.01f64..10.0, d in 0.0f64..20.0) {
            let p = LaplaceParams::new(mu, b).unwrap();
            let (l, r) = (laplace_pdf(mu - d, p), laplace_pdf(mu + d, p));
            prop_assert!((l - r).abs() <= 1e-12 * l.max(r).max(1e-300));
        }

        #[test]
        fn quantile_inverts_cdf(u in 1e-6f64..(1.0 - 1e-6), mu in -3.0f64..3.0, b in 0.05f64..5.0) {
            let p = LaplaceParams::new(mu, b).unwrap();
            prop_assert!((laplace_cdf(laplace_quantile(u, p), p) - u).abs() < 1e-9);
        }
    }
}
