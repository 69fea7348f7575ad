use alloc::collections::BTreeMap;
use alloc::format;

use libm::log;

use super::Parameter;
use crate::calendar::Timescale;
use crate::error::{Error, Result};
use crate::stats::{BurrParams, LaplaceParams};

/// Lower bound applied to the Laplace scale.
pub const B_FLOOR: f64 = 1e-6;
/// Lower bound applied to the Burr shapes.
pub const SHAPE_FLOOR: f64 = 1e-3;

/// `beta0 + beta1 ln F (+ beta2 ln E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamLine {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: Option<f64>,
}

impl ParamLine {
    pub fn eval(&self, ln_followers: f64, ln_engagement: f64) -> f64 {
        self.beta0 + self.beta1 * ln_followers + self.beta2.unwrap_or(0.0) * ln_engagement
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelCoefficients {
    lines: BTreeMap<(Parameter, Timescale), ParamLine>,
}

impl ModelCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    /// Regression coefficients estimated on the full Facebook news corpus,
    /// for the weekly, monthly and quarterly timescales.
    pub fn published() -> Self {
        use Parameter::*;
        use Timescale::*;
        let rows: [(Parameter, Timescale, f64, f64, Option<f64>); 12] = [
            (Mu, Weekly, -0.109, 0.054, Some(-0.062)),
            (Mu, Monthly, 0.073, 0.037, Some(-0.051)),
            (Mu, Quarterly, 0.384, 0.031, Some(-0.065)),
            (B, Weekly, 0.613, 0.027, Some(-0.054)),
            (B, Monthly, 0.593, 0.041, Some(-0.066)),
            (B, Quarterly, 0.844, 0.056, Some(-0.094)),
            (C, Weekly, 8420.469, -372.77, None),
            (C, Monthly, 2550.01, -127.559, None),
            (C, Quarterly, 1053.905, -56.113, None),
            (K, Weekly, -0.778, 0.083, None),
            (K, Monthly, -0.751, 0.078, None),
            (K, Quarterly, -0.714, 0.073, None),
        ];
        let mut m = ModelCoefficients::new();
        for (p, t, beta0, beta1, beta2) in rows {
            m.insert(p, t, ParamLine { beta0, beta1, beta2 }).expect("published table is valid");
        }
        m
    }

    /// Adds or replaces a line. `beta2` must be present exactly for `mu` and
    /// `b`; daily lines are not accepted.
    pub fn insert(&mut self, parameter: Parameter, timescale: Timescale, line: ParamLine) -> Result<()> {
        if timescale == Timescale::Daily {
            return Err(Error::InvalidArgument("no daily growth model".into()));
        }
        if parameter.uses_engagement() != line.beta2.is_some() {
            return Err(Error::InvalidArgument(format!(
                "beta2 must be {} for parameter {parameter}",
                if parameter.uses_engagement() { "present" } else { "absent" }
            )));
        }
        let finite = line.beta0.is_finite() && line.beta1.is_finite() && line.beta2.is_none_or(f64::is_finite);
        if !finite {
            return Err(Error::InvalidArgument(format!("non-finite coefficient for {parameter}/{timescale}")));
        }
        self.lines.insert((parameter, timescale), line);
        Ok(())
    }

    pub fn get(&self, parameter: Parameter, timescale: Timescale) -> Result<&ParamLine> {
        self.lines
            .get(&(parameter, timescale))
            .ok_or_else(|| Error::MissingCoefficients(format!("{parameter}/{timescale}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Parameter, Timescale, &ParamLine)> {
        self.lines.iter().map(|((p, t), l)| (*p, *t, l))
    }

    /// True when all four parameters are available at `timescale`.
    pub fn covers(&self, timescale: Timescale) -> bool {
        Parameter::ALL.iter().all(|p| self.lines.contains_key(&(*p, timescale)))
    }

    /// True when every (parameter, W/M/Q) line is present.
    pub fn is_complete(&self) -> bool {
        [Timescale::Weekly, Timescale::Monthly, Timescale::Quarterly]
            .iter()
            .all(|t| self.covers(*t))
    }
}

/// Which parameters hit their floor during an evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClampFlags {
    pub b: bool,
    pub c: bool,
    pub k: bool,
}

fn ln_positive(value: f64, what: &str) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(log(value))
    } else {
        Err(Error::Domain(format!("{what} must be positive, got {value}")))
    }
}

pub fn eval_mu_b(
    coeffs: &ModelCoefficients,
    timescale: Timescale,
    followers: f64,
    engagement: f64,
) -> Result<(LaplaceParams, ClampFlags)> {
    let lf = ln_positive(followers, "followers")?;
    let le = ln_positive(engagement, "engagement")?;
    let mu = coeffs.get(Parameter::Mu, timescale)?.eval(lf, le);
    let b = coeffs.get(Parameter::B, timescale)?.eval(lf, le);
    let flags = ClampFlags {
        b: b < B_FLOOR,
        ..ClampFlags::default()
    };
    Ok((LaplaceParams { mu, b: b.max(B_FLOOR) }, flags))
}

pub fn eval_c_k(coeffs: &ModelCoefficients, timescale: Timescale, followers: f64) -> Result<(BurrParams, ClampFlags)> {
    let lf = ln_positive(followers, "followers")?;
    let c = coeffs.get(Parameter::C, timescale)?.eval(lf, 0.0);
    let k = coeffs.get(Parameter::K, timescale)?.eval(lf, 0.0);
    let flags = ClampFlags {
        c: c < SHAPE_FLOOR,
        k: k < SHAPE_FLOOR,
        ..ClampFlags::default()
    };
    Ok((
        BurrParams {
            c: c.max(SHAPE_FLOOR),
            k: k.max(SHAPE_FLOOR),
        },
        flags,
    ))
}
