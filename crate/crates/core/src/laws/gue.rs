//! Laws of the k×k GUE with external source diag(α_1, …, α_k):
//!
//!   G_k(T; α; s) = det[∫ x^{i−1} e^{−x²/2 + α_j x}(1 − sχ_{(T,∞)}) dx]
//!                  / det[∫ x^{i−1} e^{−x²/2 + α_j x} dx].

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::det_c;
use crate::sderiv;
use crate::special::spiked_moment;
use crate::{Error, Result};

pub use crate::special::normal_cdf;

pub const MAX_K: usize = 8;
pub const MAX_K_JTH: usize = 6;
pub const MIN_GAP: f64 = 1e-4;
/// Spacing ε of the perturbed route, α = ε·(1, …, k).
pub const PERTURBATION: f64 = 1e-3;

fn check(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() || alphas.len() > MAX_K {
        return Err(Error::InvalidArgument("G_k needs 1 ≤ k ≤ 8 parameters"));
    }
    for j in 0..alphas.len() {
        for i in 0..j {
            let gap = (alphas[j] - alphas[i]).abs();
            if gap <= MIN_GAP {
                return Err(Error::ConfluentAlphas(gap));
            }
        }
    }
    Ok(())
}

fn ratio(num: DMatrix<Complex64>, den: DMatrix<Complex64>) -> Result<Complex64> {
    let d = det_c(&den);
    if d.norm() == 0.0 || !d.is_finite() {
        return Err(Error::SingularDenominator);
    }
    Ok(det_c(&num) / d)
}

/// G_k(T; α; s) for distinct α. T may be ±∞.
pub fn gk(t: f64, alphas: &[f64], s: Complex64) -> Result<Complex64> {
    check(alphas)?;
    let k = alphas.len();
    if t == f64::INFINITY {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut num = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
    let mut den = num.clone();
    for (j, &a) in alphas.iter().enumerate() {
        for i in 0..k {
            num[(i, j)] = spiked_moment(i + 1, a, t, s)?;
            den[(i, j)] = spiked_moment(i + 1, a, f64::INFINITY, s)?;
        }
    }
    ratio(num, den)
}

/// G_k(T; 0, …, 0; s): the confluent limit of the determinant ratio is the
/// ratio of Hankel determinants of truncated moments.
pub fn gk_zero(t: f64, k: usize, s: Complex64) -> Result<Complex64> {
    if k == 0 || k > MAX_K {
        return Err(Error::InvalidArgument("G_k needs 1 ≤ k ≤ 8"));
    }
    if t == f64::INFINITY {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mom_t: Vec<Complex64> = (1..2 * k).map(|i| spiked_moment(i, 0.0, t, s)).collect::<Result<_>>()?;
    let mom: Vec<Complex64> = (1..2 * k)
        .map(|i| spiked_moment(i, 0.0, f64::INFINITY, s))
        .collect::<Result<_>>()?;
    let num = DMatrix::from_fn(k, k, |i, j| mom_t[i + j]);
    let den = DMatrix::from_fn(k, k, |i, j| mom[i + j]);
    ratio(num, den)
}

fn check_jk(j: usize, k: usize) -> Result<()> {
    if k == 0 || k > MAX_K_JTH || j == 0 || j > k {
        return Err(Error::InvalidArgument("need 1 ≤ j ≤ k ≤ 6"));
    }
    Ok(())
}

/// G^{(j)}_k(T), the j-th largest eigenvalue of k×k GUE, from the Hankel form.
pub fn gk_jth(t: f64, j: usize, k: usize) -> Result<f64> {
    check_jk(j, k)?;
    sderiv::jth(|s| gk_zero(t, k, s), j)
}

/// The j-th law with external source α; all-zero α goes through [`gk_jth`].
pub fn gk_jth_with(t: f64, j: usize, alphas: &[f64]) -> Result<f64> {
    check_jk(j, alphas.len())?;
    if alphas.iter().all(|&a| a == 0.0) {
        return gk_jth(t, j, alphas.len());
    }
    sderiv::jth(|s| gk(t, alphas, s), j)
}

/// G^{(j)}_k(T) by perturbing α = ε·(1, …, k) and extrapolating ε → 0 from ε
/// and ε/2. The determinants lose about k(k−1)/2·log10(1/ε) digits, so this
/// route is only accurate for small k; it serves as a cross-check.
pub fn gk_jth_perturbed(t: f64, j: usize, k: usize, eps: f64) -> Result<f64> {
    check_jk(j, k)?;
    let at = |e: f64| {
        let alphas: Vec<f64> = (1..=k).map(|i| e * i as f64).collect();
        sderiv::jth(|s| gk(t, &alphas, s), j)
    };
    Ok(2.0 * at(0.5 * eps)? - at(eps)?)
}
