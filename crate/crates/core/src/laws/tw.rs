//! F_TW(T; s) = det(1 − sχ_{[T,∞)} K_Airy χ_{[T,∞)}) and the j-th eigenvalue laws.

use num_complex::Complex64;

use super::kernel::{AiryDiscretization, DEFAULT_NODES, DEFAULT_SCALE};
use crate::sderiv;
use crate::{Error, Result};

/// Largest disagreement tolerated between n and 2n nodes.
pub const DOUBLING_TOL: f64 = 1e-7;

pub(crate) fn check_s(s: Complex64) -> Result<()> {
    if !((s - 1.0).norm() <= 1.0 + 1e-12) {
        return Err(Error::InvalidArgument("s must satisfy |s − 1| ≤ 1"));
    }
    Ok(())
}

/// Nyström determinant with the default 80 nodes, checked against 160.
pub fn fredholm_tw(t: f64, s: Complex64) -> Result<Complex64> {
    check_s(s)?;
    if s == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let d = AiryDiscretization::new(t)?.fredholm(s);
    let d2 = AiryDiscretization::with(t, 2 * DEFAULT_NODES, DEFAULT_SCALE)?.fredholm(s);
    let diff = (d - d2).norm();
    if diff > DOUBLING_TOL {
        return Err(Error::Divergence(diff));
    }
    Ok(d)
}

/// F^{(j)}_TW(T) = Σ_{i<j} (−1)^i/i! ∂_s^i F_TW(T; s)|_{s=1}, with the same
/// doubling check.
pub fn tw_jth(t: f64, j: usize) -> Result<f64> {
    if j == 0 || j > 6 {
        return Err(Error::InvalidArgument("j must be in 1..=6"));
    }
    let d = AiryDiscretization::new(t)?;
    let d2 = AiryDiscretization::with(t, 2 * DEFAULT_NODES, DEFAULT_SCALE)?;
    let v = sderiv::jth(|s| Ok(d.fredholm(s)), j)?;
    let v2 = sderiv::jth(|s| Ok(d2.fredholm(s)), j)?;
    if (v - v2).abs() > DOUBLING_TOL {
        return Err(Error::Divergence((v - v2).abs()));
    }
    Ok(v)
}
