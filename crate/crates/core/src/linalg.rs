//! Thin wrappers over nalgebra for the small dense problems used throughout.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub fn det_c(m: &CMatrix) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

pub fn det_r(m: &RMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// log|det| and sign of a real matrix by partial-pivot LU.
pub fn log_abs_det_r(m: &RMatrix) -> (f64, f64) {
    let n = m.nrows();
    if n == 0 {
        return (0.0, 1.0);
    }
    let lu = m.clone().lu();
    let u = lu.u();
    let mut sign = if lu.p().determinant::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mut acc = 0.0;
    for i in 0..n {
        let d = u[(i, i)];
        if d == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if d < 0.0 {
            sign = -sign;
        }
        acc += d.abs().ln();
    }
    (acc, sign)
}

pub fn solve_c(m: &CMatrix, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    m.clone().lu().solve(b).ok_or(Error::SingularOperator)
}

pub fn solve_r(m: &RMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
    m.clone().lu().solve(b).ok_or(Error::SingularOperator)
}

/// 2-norm condition number from singular values.
pub fn cond_r(m: &RMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &RMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    v
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Vandermonde product ∏_{i<j}(x_j − x_i).
pub fn vandermonde(x: &[f64]) -> f64 {
    let mut p = 1.0;
    for j in 0..x.len() {
        for i in 0..j {
            p *= x[j] - x[i];
        }
    }
    p
}
