//! Monte Carlo sampling, file formats and the command line for Hermitian
//! matrix models with a spiked external source. The numerics live in
//! `spiked-core`, re-exported here as [`core`].

pub use spiked_core as core;

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod oracle;
pub mod regime;
pub mod sampler;

pub use error::{Error, Result};
