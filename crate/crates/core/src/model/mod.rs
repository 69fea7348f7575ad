//! Size-dependent growth model: distribution parameters as linear functions
//! of log followers (and log engagement), and forward simulation.
//!
//! Engagement follows `E_{t+1} = E_t e^g` with `g ~ Laplace(mu, b)`, and
//! followers `F_{t+1} = F_t r` with `r ~ Burr(c, k)`, where
//!
//! ```text
//! mu = b0 + b1 ln F_t + b2 ln E_t
//! b  = b0 + b1 ln F_t + b2 ln E_t
//! c  = b0 + b1 ln F_t
//! k  = b0 + b1 ln F_t
//! ```

mod coefficients;
mod regression;
mod simulate;

use core::fmt;
use core::str::FromStr;

use crate::error::Error;

pub use coefficients::{
    eval_c_k, eval_mu_b, ClampFlags, ModelCoefficients, ParamLine, B_FLOOR, SHAPE_FLOOR,
};
pub use regression::{ols, regress_parameters, BinnedFit, FittedParams, OlsFit, ParamRegression};
pub use simulate::{
    normalized_to_final, sample_burr, sample_laplace, simulate, summarize, ClampCounts, SimConfig,
    SimState, StepSummary, Trajectory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parameter {
    Mu,
    B,
    C,
    K,
}

impl Parameter {
    pub const ALL: [Parameter; 4] = [Parameter::Mu, Parameter::B, Parameter::C, Parameter::K];

    /// Whether the parameter also depends on log engagement.
    pub fn uses_engagement(self) -> bool {
        matches!(self, Parameter::Mu | Parameter::B)
    }

    pub fn code(self) -> &'static str {
        match self {
            Parameter::Mu => "mu",
            Parameter::B => "b",
            Parameter::C => "c",
            Parameter::K => "k",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "mu" => Ok(Parameter::Mu),
            "b" => Ok(Parameter::B),
            "c" => Ok(Parameter::C),
            "k" => Ok(Parameter::K),
            other => Err(Error::InvalidArgument(alloc::format!("unknown parameter {other:?}"))),
        }
    }
}
