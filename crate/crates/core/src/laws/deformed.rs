//! The deformed laws
//!
//!   F_1(T; α; s) = F_TW(T; s)·(1 − s⟨(1 − sχKχ)^{-1} C_α, χ Ai⟩),
//!   F_k(T; α; s) = F_TW(T; s)·det[(α_i + d/dT)^{j−1} r(T; α_i; s)] / ∏_{i<j}(α_j − α_i),
//!
//! with r = F_1/F_TW. T-derivatives of r are taken in Taylor mode on the
//! Nyström system: the nodes move rigidly with T, so every ingredient has an
//! exact recursion for its δ-Taylor coefficients (Ai″ = xAi, C′ = Ai − αC and
//! (∂_x + ∂_y)K = −Ai(x)Ai(y)). No interpolation window in T is needed, which
//! matters for complex s where r(·; s) has poles close to the real T-axis.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::kernel::{ai_taylor, AiryDiscretization, AI_CUTOFF};
use super::tw::check_s;
use crate::linalg::{det_c, vandermonde, RMatrix};
use crate::sderiv;
use crate::special::c_alpha::c_alpha_grid;
use crate::{Error, Result};

pub const MAX_K: usize = 5;
pub const MIN_GAP: f64 = 1e-4;
pub const MAX_ALPHA: f64 = 10.0;
/// For α < 0, C_α grows like e^{|α|ξ} and ⟨C_α, Ai⟩ ~ e^{|α|³/3} has to
/// cancel down to a probability. At α = −2 about 1e-9 absolute accuracy
/// remains; below that it degrades quickly.
pub const MIN_ALPHA: f64 = -2.0;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= MIN_ALPHA && alpha <= MAX_ALPHA) {
        return Err(Error::DomainError(alpha));
    }
    Ok(())
}

/// C_α at a node; zero where Ai has underflowed, since only the product
/// with Ai-weighted quantities enters.
fn c_at(x: f64, alpha: f64) -> Result<f64> {
    if x > AI_CUTOFF {
        Ok(0.0)
    } else {
        c_alpha_grid(x, alpha)
    }
}

/// Everything at one T that does not depend on α or s.
#[derive(Debug, Clone)]
pub struct DeformedSetup {
    disc: AiryDiscretization,
    order: usize,
    /// δ-Taylor coefficients of Ai(ξ_i + δ), order + 1 of them per node.
    ai: Vec<Vec<f64>>,
    /// K_m for m = 1..=order, symmetrized.
    kmats: Vec<RMatrix>,
}

/// C_α at the nodes together with its δ-Taylor coefficients.
#[derive(Debug, Clone)]
pub struct AlphaSeries {
    pub alpha: f64,
    coeffs: Vec<Vec<f64>>,
}

impl DeformedSetup {
    pub fn new(t: f64, order: usize) -> Result<Self> {
        Self::with_disc(AiryDiscretization::new(t)?, order)
    }

    pub fn with_disc(disc: AiryDiscretization, order: usize) -> Result<Self> {
        let n = disc.len();
        let ai: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut c = alloc::vec![0.0; order + 1];
                ai_taylor(disc.nodes[i], disc.ai_values()[i], disc.ai_prime_values()[i], &mut c);
                c
            })
            .collect();
        let sw = disc.sqrt_weights();
        let kmats = (1..=order)
            .map(|m| {
                DMatrix::from_fn(n, n, |i, j| {
                    let q = m - 1;
                    let prod: f64 = (0..=q).map(|l| ai[i][l] * ai[j][q - l]).sum();
                    -sw[i] * sw[j] * prod / m as f64
                })
            })
            .collect();
        Ok(DeformedSetup { disc, order, ai, kmats })
    }

    pub fn discretization(&self) -> &AiryDiscretization {
        &self.disc
    }

    pub fn alpha_series(&self, alpha: f64) -> Result<AlphaSeries> {
        check_alpha(alpha)?;
        let coeffs = self
            .disc
            .nodes
            .iter()
            .zip(&self.ai)
            .map(|(&x, a)| {
                let mut c = alloc::vec![0.0; self.order + 1];
                c[0] = c_at(x, alpha)?;
                if x > AI_CUTOFF {
                    return Ok(c);
                }
                for m in 0..self.order {
                    c[m + 1] = (a[m] - alpha * c[m]) / (m + 1) as f64;
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AlphaSeries { alpha, coeffs })
    }

    /// Taylor coefficients r_0..r_order of r(T + δ; α; s) in δ.
    pub fn ratio_series(&self, c: &AlphaSeries, s: Complex64) -> Vec<Complex64> {
        let n = self.disc.len();
        let p = self.order;
        let sw = self.disc.sqrt_weights();
        let mut y: Vec<Vec<Complex64>> = Vec::with_capacity(p + 1);
        for k in 0..=p {
            let mut rhs: Vec<Complex64> = (0..n).map(|i| Complex64::new(sw[i] * self.ai[i][k], 0.0)).collect();
            for m in 1..=k {
                let km = &self.kmats[m - 1];
                let prev = &y[k - m];
                for i in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        acc += prev[j] * km[(i, j)];
                    }
                    rhs[i] += s * acc;
                }
            }
            y.push(self.disc.spectral_solve(s, &rhs));
        }
        (0..=p)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..=k {
                    for i in 0..n {
                        acc += y[k - m][i] * (sw[i] * c.coeffs[i][m]);
                    }
                }
                let base = if k == 0 { 1.0 } else { 0.0 };
                Complex64::new(base, 0.0) - s * acc
            })
            .collect()
    }

    /// d^m r/dT^m at T for m ≤ order.
    pub fn ratio_derivatives(&self, c: &AlphaSeries, s: Complex64) -> Vec<Complex64> {
        let mut fact = 1.0;
        self.ratio_series(c, s)
            .into_iter()
            .enumerate()
            .map(|(m, v)| {
                if m > 0 {
                    fact *= m as f64;
                }
                v * fact
            })
            .collect()
    }

    fn fk_value(&self, series: &[AlphaSeries], s: Complex64) -> Complex64 {
        let k = series.len();
        let rows: Vec<Vec<Complex64>> = series
            .iter()
            .map(|c| {
                let d = self.ratio_derivatives(c, s);
                // (α + D)^q r = Σ_m binom(q, m) α^{q−m} D^m r
                (0..k)
                    .map(|q| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        let mut binom = 1.0;
                        for m in 0..=q {
                            acc += d[m] * (binom * c.alpha.powi((q - m) as i32));
                            binom = binom * (q - m) as f64 / (m + 1) as f64;
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let mat = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
        let alphas: Vec<f64> = series.iter().map(|c| c.alpha).collect();
        self.disc.fredholm(s) * det_c(&mat) / vandermonde(&alphas)
    }
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() || alphas.len() > MAX_K {
        return Err(Error::InvalidArgument("F_k needs 1 ≤ k ≤ 5 parameters"));
    }
    for j in 0..alphas.len() {
        check_alpha(alphas[j])?;
        for i in 0..j {
            let gap = (alphas[j] - alphas[i]).abs();
            if gap <= MIN_GAP {
                return Err(Error::ConfluentAlphas(gap));
            }
        }
    }
    Ok(())
}

/// F_1(T; α; s), computed as a bordered determinant so it stays finite at
/// the zeros of F_TW(T; s).
pub fn f1(t: f64, alpha: f64, s: Complex64) -> Result<Complex64> {
    check_s(s)?;
    check_alpha(alpha)?;
    let disc = AiryDiscretization::new(t)?;
    let c = disc
        .nodes
        .iter()
        .map(|&x| c_at(x, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(disc.bordered_det(s, &c, disc.ai_values()))
}

pub fn fk(t: f64, alphas: &[f64], s: Complex64) -> Result<Complex64> {
    check_s(s)?;
    check_alphas(alphas)?;
    let setup = DeformedSetup::new(t, alphas.len() - 1)?;
    let series = alphas.iter().map(|&a| setup.alpha_series(a)).collect::<Result<Vec<_>>>()?;
    Ok(setup.fk_value(&series, s))
}

/// F^{(j)}_k(T; α) = Σ_{i<j} (−1)^i/i! ∂_s^i F_k(T; α; s)|_{s=1}.
pub fn fk_jth(t: f64, j: usize, alphas: &[f64]) -> Result<f64> {
    if j == 0 || j > 6 {
        return Err(Error::InvalidArgument("j must be in 1..=6"));
    }
    check_alphas(alphas)?;
    let setup = DeformedSetup::new(t, alphas.len() - 1)?;
    let series = alphas.iter().map(|&a| setup.alpha_series(a)).collect::<Result<Vec<_>>>()?;
    sderiv::jth(|s| Ok(setup.fk_value(&series, s)), j)
}
