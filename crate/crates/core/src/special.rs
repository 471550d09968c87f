//! Special functions: Airy, the contour function C_α, error functions and
//! truncated Gaussian moments.

pub mod airy;
pub mod c_alpha;
pub mod erf;
pub mod moment;

pub use airy::{airy_ai, airy_ai_prime};
pub use c_alpha::{c_alpha, ContourEval};
pub use erf::{erfc, erfcx, normal_cdf};
pub use moment::spiked_moment;
