//! Distribution calibration and nonparametric testing.

mod burr;
mod comparison;
mod laplace;
mod mann_whitney;

pub use burr::{MIN_BURR_SAMPLES, burr_cdf, burr_median, burr_quantile, fit_burr, BurrFit, BurrParams};
pub use comparison::{MIN_SYMMETRY_SAMPLES, 
    class_test_matrix, detailed_balance_check, reliability_comparison, ClassMatrix, MatrixCell,
    Quantity, ReliabilityRow,
};
pub use laplace::{fit_laplace, laplace_cdf, laplace_pdf, laplace_quantile, LaplaceParams};
pub use mann_whitney::{mann_whitney, mann_whitney_with, Alternative, Method, TestResult, EXACT_THRESHOLD};

/// Sample mean and standard deviation (n - 1 denominator), two-pass.
pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1.0)))
}
