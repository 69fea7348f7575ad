//! File formats, synthetic data and pipeline drivers around
//! [`pagegrowth_core`].

pub mod cli;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod synth;

pub use error::{AppError, Result};
