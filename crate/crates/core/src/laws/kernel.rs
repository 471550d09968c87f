//! The Airy kernel and its Nyström discretization on [T, ∞).

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::linalg::{solve_c, RMatrix};
use crate::quadrature::gauss_legendre;
use crate::special::airy::ai_pair;
use crate::{Error, Result};

pub const DEFAULT_NODES: usize = 80;
/// Scale L of the map ξ = T + L·u/(1 − u).
pub const DEFAULT_SCALE: f64 = 10.0;
/// Lowest admissible left endpoint.
pub const T_MIN: f64 = -12.0;

/// Kernel entries below this are dropped.
const NEGLIGIBLE: f64 = 1e-30;
/// Beyond this Ai has underflowed for all practical purposes.
pub(crate) const AI_CUTOFF: f64 = 80.0;

pub(crate) fn ai_at(x: f64) -> (f64, f64) {
    if x > AI_CUTOFF {
        (0.0, 0.0)
    } else {
        ai_pair(x)
    }
}

/// Taylor coefficients of Ai(x + δ) in δ from y″ = (x + δ) y.
pub(crate) fn ai_taylor(x: f64, ai: f64, aip: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = ai;
    if n > 1 {
        out[1] = aip;
    }
    if n > 2 {
        out[2] = 0.5 * x * ai;
    }
    for k in 1..n.saturating_sub(2) {
        out[k + 2] = (x * out[k] + out[k - 1]) / ((k + 2) * (k + 1)) as f64;
    }
}

/// K(x, y) = (Ai(x)Ai′(y) − Ai′(x)Ai(y))/(x − y), with Ai′(x)² − x Ai(x)² on
/// the diagonal.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    let (ax, apx) = ai_at(x);
    let (ay, apy) = ai_at(y);
    kernel_from(x, ax, apx, y, ay, apy)
}

fn kernel_from(x: f64, ax: f64, apx: f64, y: f64, ay: f64, apy: f64) -> f64 {
    let h = y - x;
    if h.abs() > 0.1 {
        return (ax * apy - apx * ay) / (x - y);
    }
    kernel_series(x, ax, apx, h)
}

/// K(x, x + h) with Ai(x + h), Ai′(x + h) expanded about x; the constant term
/// of the numerator cancels exactly.
fn kernel_series(x: f64, ax: f64, apx: f64, h: f64) -> f64 {
    let mut a = [0.0; 24];
    ai_taylor(x, ax, apx, &mut a);
    let mut acc = 0.0;
    for n in (1..23).rev() {
        acc = acc * h + (ax * (n + 1) as f64 * a[n + 1] - apx * a[n]);
    }
    -acc
}

/// Gauss–Legendre nodes pushed onto (T, ∞) by ξ = T + L·u/(1 − u), with the
/// kernel symmetrized as √w_i K(ξ_i, ξ_j) √w_j. Its eigen-decomposition is
/// computed once, so determinants and resolvent forms are cheap for any s.
#[derive(Debug, Clone)]
pub struct AiryDiscretization {
    pub t: f64,
    pub scale: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    sqrt_w: Vec<f64>,
    ai: Vec<f64>,
    aip: Vec<f64>,
    kernel: RMatrix,
    eigvals: Vec<f64>,
    eigvecs: RMatrix,
}

impl AiryDiscretization {
    pub fn new(t: f64) -> Result<Self> {
        Self::with(t, DEFAULT_NODES, DEFAULT_SCALE)
    }

    pub fn with(t: f64, nodes: usize, scale: f64) -> Result<Self> {
        if !(t >= T_MIN) || !t.is_finite() {
            return Err(Error::DomainError(t));
        }
        if nodes < 4 || !(scale > 0.0) {
            return Err(Error::InvalidArgument("discretization needs ≥ 4 nodes and a positive scale"));
        }
        let gl = gauss_legendre(nodes, 0.0, 1.0)?;
        let mut xs = Vec::with_capacity(nodes);
        let mut ws = Vec::with_capacity(nodes);
        for (u, w) in gl.nodes.iter().zip(&gl.weights) {
            let v = 1.0 - u;
            xs.push(t + scale * u / v);
            ws.push(w * scale / (v * v));
        }
        let sqrt_w: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
        let (ai, aip): (Vec<f64>, Vec<f64>) = xs.iter().map(|&x| ai_at(x)).unzip();
        let kernel = DMatrix::from_fn(nodes, nodes, |i, j| {
            let k = if i == j {
                aip[i] * aip[i] - xs[i] * ai[i] * ai[i]
            } else {
                kernel_from(xs[i], ai[i], aip[i], xs[j], ai[j], aip[j])
            };
            let v = sqrt_w[i] * k * sqrt_w[j];
            if v.abs() < NEGLIGIBLE {
                0.0
            } else {
                v
            }
        });
        // exact symmetry, so the eigensolver sees a symmetric matrix
        let kernel = (&kernel + kernel.transpose()) * 0.5;
        // The far nodes carry entries spanning hundreds of decades, which
        // upsets the QR eigensolver; decompose only the block of nodes with
        // a non-negligible row and give the rest eigenvalue 0.
        let active: Vec<usize> = (0..nodes).filter(|&i| (0..nodes).any(|j| kernel[(i, j)] != 0.0)).collect();
        let m = active.len();
        let block = DMatrix::from_fn(m, m, |i, j| kernel[(active[i], active[j])]);
        let eig = block.symmetric_eigen();
        let mut eigvals = alloc::vec![0.0; nodes];
        let mut eigvecs = RMatrix::zeros(nodes, nodes);
        for c in 0..m {
            eigvals[c] = eig.eigenvalues[c];
            for (r, &ir) in active.iter().enumerate() {
                eigvecs[(ir, c)] = eig.eigenvectors[(r, c)];
            }
        }
        let mut c = m;
        for i in 0..nodes {
            if !active.contains(&i) {
                eigvecs[(i, c)] = 1.0;
                c += 1;
            }
        }
        if eigvals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence("kernel eigen-decomposition"));
        }
        Ok(AiryDiscretization {
            t,
            scale,
            nodes: xs,
            weights: ws,
            sqrt_w,
            ai,
            aip,
            kernel,
            eigvals,
            eigvecs,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kernel_matrix(&self) -> &RMatrix {
        &self.kernel
    }

    /// Eigenvalues of the symmetrized kernel (unsorted).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn ai_values(&self) -> &[f64] {
        &self.ai
    }

    pub fn ai_prime_values(&self) -> &[f64] {
        &self.aip
    }

    pub(crate) fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_w
    }

    /// det(1 − sK) on the grid, as ∏(1 − sλ_k).
    pub fn fredholm(&self, s: Complex64) -> Complex64 {
        self.eigvals.iter().map(|&l| 1.0 - s * l).product()
    }

    /// Σ_i w_i f(ξ_i) g(ξ_i).
    pub fn inner(&self, f: &[Complex64], g: &[f64]) -> Complex64 {
        f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a * (b * w)).sum()
    }

    /// Solves (1 − sχKχ) u = f on the nodes by LU on the symmetrized system.
    /// Fails with `SingularOperator` if the solve is singular or its relative
    /// residual exceeds 1e-10.
    pub fn resolvent_apply(&self, s: Complex64, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.len();
        if f.len() != n {
            return Err(Error::InvalidArgument("function samples must match the node count"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            Complex64::new(d, 0.0) - s * self.kernel[(i, j)]
        });
        let rhs = DVector::from_fn(n, |i, _| f[i] * self.sqrt_w[i]);
        let sol = solve_c(&m, &rhs)?;
        let res = (&m * &sol - &rhs).norm();
        if !(res <= 1e-10 * (1.0 + rhs.norm())) {
            return Err(Error::SingularOperator);
        }
        Ok((0..n).map(|i| sol[i] / self.sqrt_w[i]).collect())
    }

    /// Applies (1 − sK̃)^{-1} to a vector already in symmetrized form, through
    /// the eigen-decomposition.
    pub(crate) fn spectral_solve(&self, s: Complex64, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let q = &self.eigvecs;
        let mut coef = alloc::vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                acc += v[i] * q[(i, k)];
            }
            coef[k] = acc / (1.0 - s * self.eigvals[k]);
        }
        (0..n)
            .map(|i| (0..n).map(|k| coef[k] * q[(i, k)]).sum())
            .collect()
    }

    /// det(1 − sK)·(1 − s⟨(1 − sK)^{-1} f, g⟩) without dividing by 1 − sλ,
    /// so it stays finite where the resolvent has a pole. f and g are plain
    /// samples at the nodes.
    pub(crate) fn bordered_det(&self, s: Complex64, f: &[f64], g: &[f64]) -> Complex64 {
        let n = self.len();
        let q = &self.eigvecs;
        let factors: Vec<Complex64> = self.eigvals.iter().map(|&l| 1.0 - s * l).collect();
        let full: Complex64 = factors.iter().product();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let (mut pf, mut pg) = (0.0, 0.0);
            for i in 0..n {
                pf += q[(i, k)] * self.sqrt_w[i] * f[i];
                pg += q[(i, k)] * self.sqrt_w[i] * g[i];
            }
            let others: Complex64 = factors
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, v)| *v)
                .product();
            acc += others * (pf * pg);
        }
        full - s * acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::airy::AIP0;

    #[test]
    fn diagonal_and_near_diagonal() {
        assert!((airy_kernel(0.0, 0.0) - AIP0 * AIP0).abs() < 1e-15);
        for x in [-7.0, -1.0, 0.3, 4.0] {
            let d = airy_kernel(x, x);
            assert!((airy_kernel(x, x + 1e-8) - d).abs() < 1e-8);
            // the series against the quotient at the same points
            let (ax, apx) = ai_at(x);
            for h in [0.05, 0.1, -0.1] {
                let (ay, apy) = ai_at(x + h);
                let q = (ax * apy - apx * ay) / -h;
                assert!((q - kernel_series(x, ax, apx, h)).abs() < 1e-12, "x={x} h={h}");
            }
        }
    }

    #[test]
    fn eigenvalues_in_unit_interval() {
        let d = AiryDiscretization::new(-4.0).unwrap();
        for &l in d.eigenvalues() {
            assert!(l > -1e-14 && l < 1.0);
        }
    }
}
