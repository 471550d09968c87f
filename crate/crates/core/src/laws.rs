//! Limiting distributions: the Tracy–Widom family from the Airy-kernel
//! Fredholm determinant, the deformed laws F_1 and F_k, the external-source
//! GUE laws G_k and the normal law.

pub mod curve;
pub mod deformed;
pub mod gue;
pub mod kernel;
pub mod tw;

pub use curve::{uniform_grid, LawCurve, LawKind};
pub use deformed::{f1, fk, fk_jth};
pub use gue::{gk, gk_jth, gk_jth_perturbed, gk_jth_with, gk_zero, normal_cdf};
pub use kernel::{airy_kernel, AiryDiscretization};
pub use tw::{fredholm_tw, tw_jth};
