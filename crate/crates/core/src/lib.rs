//! Growth-rate analysis of page-level social media engagement.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the pure algorithmic
//! parts of the pipeline:
//!
//! - [`record`]: validated post and page records, dataset assembly.
//! - [`calendar`] and [`aggregate`]: UTC calendar windows and per-page windowed
//!   series of engagement and a representative follower count.
//! - [`growth`]: window-to-window growth samples, percentile trimming and size
//!   classes.
//! - [`stats`]: Laplace and Burr calibration, Mann-Whitney U tests, the
//!   symmetry (detailed balance) check and the reliability comparison.
//! - [`model`]: regression of distribution parameters on log size and the
//!   forward growth simulator.
//! - [`cohort`]: reliability labels and minimum-cost matched sampling.
//!
//! File formats, the synthetic generator and the command line live in the
//! `pagegrowth` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod calendar;
pub mod cohort;
pub mod error;
pub mod growth;
pub mod model;
pub mod record;
pub mod rng;
pub mod special;
pub mod stats;

mod optimize;

pub use error::{Error, Result};
