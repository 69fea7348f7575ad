use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate binning: fewer than 4 distinct values")]
    DegenerateBinning,

    #[error("collinear covariates")]
    CollinearCovariates,

    #[error(
        "optimizer did not converge after {iterations} iterations \
         (c = {c}, k = {k}, objective = {objective})"
    )]
    NonConvergence {
        c: f64,
        k: f64,
        objective: f64,
        iterations: usize,
    },

    #[error("no usable data")]
    NoUsableData,

    #[error("reliable pool too small: {pool} candidates for {questionable} questionable pages")]
    PoolTooSmall { questionable: usize, pool: usize },

    #[error("invalid size-class scheme: {0}")]
    InvalidScheme(String),

    #[error("missing coefficients for {0}")]
    MissingCoefficients(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simulated state left the positive range in run {run} at step {step}")]
    StateOutOfRange { run: usize, step: usize },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::CollinearCovariates
                | Error::DegenerateSample(_)
                | Error::StateOutOfRange { .. }
        )
    }
}
