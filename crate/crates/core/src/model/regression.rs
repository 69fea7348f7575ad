use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use super::{ParamLine, Parameter};
use crate::calendar::Timescale;
use crate::error::{Error, Result};
use crate::special::student_t_two_sided;
use crate::stats::{BurrParams, LaplaceParams};

/// Ordinary least squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    /// Absent when there are no residual degrees of freedom.
    pub std_errors: Option<Vec<f64>>,
    pub p_values: Option<Vec<f64>>,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub df_resid: usize,
}

/// Least squares via modified Gram-Schmidt QR. `rows` is the design matrix
/// (include the intercept column yourself); p-values are two-sided t tests
/// on the coefficient standard errors.
pub fn ols(rows: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let n = rows.len();
    if n == 0 || n != y.len() {
        return Err(Error::InvalidArgument("design and response lengths differ".into()));
    }
    let p = rows[0].len();
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidArgument("ragged design matrix".into()));
    }
    if n < p {
        return Err(Error::CollinearCovariates);
    }

    // Columns of X, orthonormalised in place into Q.
    let mut q: Vec<Vec<f64>> = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut r = vec![vec![0.0; p]; p];
    for j in 0..p {
        let original_norm = norm(&q[j]);
        for i in 0..j {
            let (done, rest) = q.split_at_mut(j);
            let proj = dot(&done[i], &rest[0]);
            r[i][j] = proj;
            for (a, b) in rest[0].iter_mut().zip(&done[i]) {
                *a -= proj * b;
            }
        }
        let remaining = norm(&q[j]);
        if !(remaining > 1e-10 * original_norm.max(f64::MIN_POSITIVE)) {
            return Err(Error::CollinearCovariates);
        }
        r[j][j] = remaining;
        for a in q[j].iter_mut() {
            *a /= remaining;
        }
    }

    let qty: Vec<f64> = q.iter().map(|col| dot(col, y)).collect();
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| r[i][k] * beta[k]).sum();
        beta[i] = (qty[i] - s) / r[i][i];
    }

    let residuals: Vec<f64> = rows
        .iter()
        .zip(y)
        .map(|(row, yi)| yi - dot(row, &beta))
        .collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let r_squared = if sst > 0.0 { (1.0 - ssr / sst).clamp(0.0, 1.0) } else { 1.0 };

    let df_resid = n - p;
    let (std_errors, p_values) = if df_resid == 0 {
        (None, None)
    } else {
        let sigma2 = ssr / df_resid as f64;
        let r_inv = invert_upper(&r);
        let se: Vec<f64> = (0..p)
            .map(|j| sqrt(sigma2 * (j..p).map(|k| r_inv[j][k] * r_inv[j][k]).sum::<f64>()))
            .collect();
        let pv = beta
            .iter()
            .zip(&se)
            .map(|(b, s)| {
                if *s > 0.0 {
                    student_t_two_sided(b / s, df_resid as f64)
                } else if *b == 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        (Some(se), Some(pv))
    };

    Ok(OlsFit {
        coefficients: beta,
        std_errors,
        p_values,
        r_squared,
        residuals,
        df_resid,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

fn invert_upper(r: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = r.len();
    let mut inv = vec![vec![0.0; p]; p];
    for j in 0..p {
        inv[j][j] = 1.0 / r[j][j];
        for i in (0..j).rev() {
            let s: f64 = (i + 1..=j).map(|k| r[i][k] * inv[k][j]).sum();
            inv[i][j] = -s / r[i][i];
        }
    }
    inv
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FittedParams {
    Laplace(LaplaceParams),
    Burr(BurrParams),
}

/// Distribution fitted on one (followers, engagement) bin, with the bin's
/// mean log covariates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinnedFit {
    pub ln_followers: f64,
    pub ln_engagement: f64,
    pub fit: FittedParams,
}

impl BinnedFit {
    fn value(&self, parameter: Parameter) -> Option<f64> {
        match (parameter, self.fit) {
            (Parameter::Mu, FittedParams::Laplace(p)) => Some(p.mu),
            (Parameter::B, FittedParams::Laplace(p)) => Some(p.b),
            (Parameter::C, FittedParams::Burr(p)) => Some(p.c),
            (Parameter::K, FittedParams::Burr(p)) => Some(p.k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamRegression {
    pub parameter: Parameter,
    pub timescale: Timescale,
    pub line: ParamLine,
    /// Standard errors in `beta0, beta1[, beta2]` order.
    pub std_errors: Option<Vec<f64>>,
    pub p_values: Option<Vec<f64>>,
    pub r_squared: f64,
    pub bins: usize,
}

/// Regresses one distribution parameter across bins on `ln F` (and `ln E`
/// for the Laplace parameters).
pub fn regress_parameters(
    bins: &[BinnedFit],
    parameter: Parameter,
    timescale: Timescale,
) -> Result<ParamRegression> {
    if timescale == Timescale::Daily {
        return Err(Error::InvalidArgument("no daily growth model".into()));
    }
    let with_engagement = parameter.uses_engagement();
    let needed = if with_engagement { 3 } else { 2 };
    if bins.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: bins.len(),
        });
    }
    let mut rows = Vec::with_capacity(bins.len());
    let mut y = Vec::with_capacity(bins.len());
    for b in bins {
        let v = b.value(parameter).ok_or_else(|| {
            Error::InvalidArgument(alloc::format!("bin fit does not carry parameter {parameter}"))
        })?;
        let mut row = vec![1.0, b.ln_followers];
        if with_engagement {
            row.push(b.ln_engagement);
        }
        rows.push(row);
        y.push(v);
    }
    let fit = ols(&rows, &y)?;
    let c = &fit.coefficients;
    Ok(ParamRegression {
        parameter,
        timescale,
        line: ParamLine {
            beta0: c[0],
            beta1: c[1],
            beta2: with_engagement.then(|| c[2]),
        },
        std_errors: fit.std_errors,
        p_values: fit.p_values,
        r_squared: fit.r_squared,
        bins: bins.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{open_unit, substream};

    fn laplace_bin(lf: f64, le: f64, mu: f64, b: f64) -> BinnedFit {
        BinnedFit {
            ln_followers: lf,
            ln_engagement: le,
            fit: FittedParams::Laplace(LaplaceParams { mu, b }),
        }
    }

    #[test]
    fn exact_interpolation() {
        let pts = [(10.0, 8.0), (11.0, 9.5), (12.5, 8.2), (13.0, 11.0)];
        let bins: Vec<BinnedFit> = pts
            .iter()
            .map(|&(lf, le)| laplace_bin(lf, le, 2.0 + 3.0 * lf - le, 1.0))
            .collect();
        let r = regress_parameters(&bins, Parameter::Mu, Timescale::Weekly).unwrap();
        assert!((r.line.beta0 - 2.0).abs() < 1e-9);
        assert!((r.line.beta1 - 3.0).abs() < 1e-10);
        assert!((r.line.beta2.unwrap() + 1.0).abs() < 1e-10);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
        // exactly three bins: no residual degrees of freedom
        let r3 = regress_parameters(&bins[..3], Parameter::Mu, Timescale::Weekly).unwrap();
        assert!((r3.line.beta1 - 3.0).abs() < 1e-9);
        assert!(r3.p_values.is_none());
    }

    #[test]
    fn too_few_bins_and_collinearity() {
        let bins = [laplace_bin(10.0, 8.0, 0.1, 1.0), laplace_bin(11.0, 9.0, 0.2, 1.0)];
        assert!(regress_parameters(&bins, Parameter::Mu, Timescale::Monthly).is_err());
        // ln E a linear function of ln F
        let bins: Vec<BinnedFit> = (0..6)
            .map(|i| laplace_bin(10.0 + i as f64, 2.0 * (10.0 + i as f64) + 1.0, 0.1 * i as f64, 1.0))
            .collect();
        assert_eq!(
            regress_parameters(&bins, Parameter::B, Timescale::Monthly),
            Err(Error::CollinearCovariates)
        );
    }

    #[test]
    fn burr_parameters_use_followers_only() {
        let bins: Vec<BinnedFit> = (0..5)
            .map(|i| BinnedFit {
                ln_followers: 10.0 + i as f64,
                ln_engagement: 3.0 * i as f64,
                fit: FittedParams::Burr(BurrParams { c: 100.0 - 5.0 * (10.0 + i as f64), k: 1.0 }),
            })
            .collect();
        let r = regress_parameters(&bins, Parameter::C, Timescale::Quarterly).unwrap();
        assert!(r.line.beta2.is_none());
        assert!((r.line.beta0 - 100.0).abs() < 1e-9 && (r.line.beta1 + 5.0).abs() < 1e-10);
        assert!(regress_parameters(&bins, Parameter::Mu, Timescale::Quarterly).is_err());
    }

    #[test]
    fn matches_reference_ols() {
        // statsmodels OLS on the same data: params, bse, pvalues
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [1.1, 1.9, 3.2, 3.8, 5.3, 5.9];
        let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![1.0, *v]).collect();
        let fit = ols(&rows, &y).unwrap();
        let se = fit.std_errors.unwrap();
        let pv = fit.p_values.unwrap();
        assert!((fit.coefficients[0] - 0.05333333333333101).abs() < 1e-12);
        assert!((fit.coefficients[1] - 0.9942857142857151).abs() < 1e-12);
        assert!((se[0] - 0.2043650639543841).abs() < 1e-10);
        assert!((se[1] - 0.05247610405316544).abs() < 1e-10);
        assert!((pv[1] - 4.570152915039458e-05).abs() < 1e-12);
        assert!((pv[0] - 0.8070002007342439).abs() < 1e-10);
    }

    #[test]
    fn noisy_recovery_is_within_two_standard_errors_mostly() {
        let truth = [0.384, 0.031, -0.065];
        let mut covered = 0;
        for rep in 0..200 {
            let mut rng = substream(500 + rep, 0);
            let bins: Vec<BinnedFit> = (0..25)
                .map(|i| {
                    let lf = 9.5 + 0.2 * i as f64 + open_unit(&mut rng);
                    let le = 6.0 + 4.0 * open_unit(&mut rng);
                    let z = crate::stats::laplace_quantile(open_unit(&mut rng), LaplaceParams { mu: 0.0, b: 0.01 });
                    laplace_bin(lf, le, truth[0] + truth[1] * lf + truth[2] * le + z, 0.5)
                })
                .collect();
            let r = regress_parameters(&bins, Parameter::Mu, Timescale::Quarterly).unwrap();
            let se = r.std_errors.unwrap();
            covered += usize::from((r.line.beta1 - truth[1]).abs() <= 2.0 * se[1]);
        }
        assert!(covered >= 180, "{covered}");
    }

}
