use std::io::{Read, Write};

use pagegrowth_core::calendar::Timescale;
use pagegrowth_core::model::{ModelCoefficients, ParamLine, Parameter};
use serde::{Deserialize, Serialize};

use super::{check_header, ParseError};
use crate::error::{AppError, Result};

pub const COEFFICIENT_HEADER: [&str; 5] = ["parameter", "timescale", "beta0", "beta1", "beta2"];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    parameter: String,
    timescale: String,
    beta0: f64,
    beta1: f64,
    beta2: Option<f64>,
}

/// Reads a coefficients table. Unlike post files, any bad row is fatal.
pub fn read_coefficients<R: Read>(input: R) -> Result<ModelCoefficients> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(&mut rdr, &COEFFICIENT_HEADER).map_err(|e| AppError::input(e.to_string()))?;
    let mut coeffs = ModelCoefficients::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| AppError::input(format!("coefficients: {e}")))?;
        let parameter: Parameter = row.parameter.parse()?;
        let timescale: Timescale = row.timescale.parse()?;
        coeffs.insert(
            parameter,
            timescale,
            ParamLine {
                beta0: row.beta0,
                beta1: row.beta1,
                beta2: row.beta2,
            },
        )?;
    }
    if coeffs.iter().next().is_none() {
        return Err(AppError::input("coefficients file has no rows"));
    }
    Ok(coeffs)
}

pub fn write_coefficients<W: Write>(out: W, coeffs: &ModelCoefficients) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COEFFICIENT_HEADER)?;
    for (parameter, timescale, line) in coeffs.iter() {
        w.serialize(Row {
            parameter: parameter.code().into(),
            timescale: timescale.code().into(),
            beta0: line.beta0,
            beta1: line.beta1,
            beta2: line.beta2,
        })?;
    }
    w.flush()
}

impl From<ParseError> for AppError {
    fn from(e: ParseError) -> Self {
        AppError::input(e.to_string())
    }
}
