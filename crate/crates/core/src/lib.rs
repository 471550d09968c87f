//! Numerics for Hermitian matrix models with a spiked external source.
//!
//! The crate covers the one-cut equilibrium problem and the phase diagram of
//! the top eigenvalue, the limiting laws at the edge and at the outliers, the
//! jump probabilities at discontinuous transitions, and exact finite-n
//! determinantal expectations.
//!
//! Everything here is `no_std` with `alloc`. Sampling, IO and the command
//! line live in the `spiked` crate.
#![no_std]

extern crate alloc;

pub mod equilibrium;
pub mod error;
pub mod finite;
pub mod laws;
pub mod linalg;
pub mod phase;
pub mod potential;
pub mod quadrature;
pub mod sderiv;
pub mod special;
pub mod transitions;

pub use error::{Error, Result};
pub use num_complex::Complex64;
