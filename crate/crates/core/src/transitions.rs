//! Jump probabilities at the secondary critical values and at a
//! discontinuous critical value, in the one-cut case.
//!
//! With γ(z) = ((z − ẽ)/(z − e))^{1/4} and ρ = (γ − γ⁻¹)/(γ + γ⁻¹),
//!
//!   M_j(z)  = c₀ (γ + γ⁻¹)/2 · ρ^j,
//!   −iM̃_j(z) = c₀ (γ − γ⁻¹)/2 · ρ^{−j},     c₀ = √(2/(π(e − ẽ))).
//!
//! Only the real number −iM̃_j is ever stored.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::equilibrium::EquilibriumData;
use crate::laws::{gk_jth, tw_jth};
use crate::linalg::{det_r, RMatrix};
use crate::{Error, Result};

/// Largest 𝐦 handled; the GUE laws in the mixtures stop at 6.
pub const MAX_M: usize = 6;
/// Trapezoid nodes on the Cauchy circle for derivatives.
const CAUCHY_NODES: usize = 64;
const MIN_GAP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneCutFrame {
    /// ẽ
    pub left: f64,
    /// e
    pub right: f64,
}

impl OneCutFrame {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left < right) || !left.is_finite() || !right.is_finite() {
            return Err(Error::InvalidInterval(left, right));
        }
        Ok(OneCutFrame { left, right })
    }

    pub fn from_equilibrium(eq: &EquilibriumData) -> Self {
        OneCutFrame { left: eq.left_endpoint, right: eq.right_endpoint }
    }

    fn check(&self, x: f64) -> Result<()> {
        if !(x > self.right) || !x.is_finite() {
            return Err(Error::DomainError(x));
        }
        Ok(())
    }

    fn prefactor(&self) -> f64 {
        (2.0 / (PI * (self.right - self.left))).sqrt()
    }

    pub fn gamma(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(((x - self.left) / (x - self.right)).powf(0.25))
    }

    /// M_j(z), or −iM̃_j(z) when `tilde`, off the real axis.
    fn eval(&self, j: i32, z: Complex64, tilde: bool) -> Complex64 {
        let g = ((z - self.left) / (z - self.right)).powf(0.25);
        let (p, m) = (g + 1.0 / g, g - 1.0 / g);
        let rho = m / p;
        if tilde {
            m * 0.5 * self.prefactor() * rho.powi(-j)
        } else {
            p * 0.5 * self.prefactor() * rho.powi(j)
        }
    }

    /// f(x), f′(x), …, f^{(order)}(x) by the Cauchy integral on the circle of
    /// radius (x − e)/2, which stays clear of the cut (−∞, e].
    fn derivatives(&self, j: i32, x: f64, order: usize, tilde: bool) -> Result<Vec<f64>> {
        self.check(x)?;
        let r = 0.5 * (x - self.right);
        let mut acc = alloc::vec![Complex64::new(0.0, 0.0); order + 1];
        for k in 0..CAUCHY_NODES {
            let th = 2.0 * PI * k as f64 / CAUCHY_NODES as f64;
            let w = Complex64::from_polar(1.0, th);
            let f = self.eval(j, x + r * w, tilde);
            let mut wp = Complex64::new(1.0, 0.0);
            for a in acc.iter_mut() {
                *a += f * wp;
                wp /= w;
            }
        }
        let mut fact = 1.0;
        let mut rp = 1.0;
        Ok(acc
            .iter()
            .enumerate()
            .map(|(d, a)| {
                if d > 0 {
                    fact *= d as f64;
                    rp *= r;
                }
                a.re * fact / (rp * CAUCHY_NODES as f64)
            })
            .collect())
    }
}

/// M_j(x) for x > e.
pub fn m_func(frame: &OneCutFrame, j: i32, x: f64) -> Result<f64> {
    frame.check(x)?;
    let g = frame.gamma(x)?;
    let (p, m) = (g + 1.0 / g, g - 1.0 / g);
    Ok(frame.prefactor() * 0.5 * p * (m / p).powi(j))
}

/// −iM̃_j(x) for x > e; positive.
pub fn m_tilde_func(frame: &OneCutFrame, j: i32, x: f64) -> Result<f64> {
    frame.check(x)?;
    let g = frame.gamma(x)?;
    let (p, m) = (g + 1.0 / g, g - 1.0 / g);
    Ok(frame.prefactor() * 0.5 * m * (m / p).powi(-j))
}

/// M_j^{(d)}(x) for d = 0..=order.
pub fn m_derivatives(frame: &OneCutFrame, j: i32, x: f64, order: usize) -> Result<Vec<f64>> {
    frame.derivatives(j, x, order, false)
}

/// (−iM̃_j)^{(d)}(x) for d = 0..=order.
pub fn m_tilde_derivatives(frame: &OneCutFrame, j: i32, x: f64, order: usize) -> Result<Vec<f64>> {
    frame.derivatives(j, x, order, true)
}

fn check_mm(mm: usize, j: usize) -> Result<()> {
    if mm == 0 || mm > MAX_M {
        return Err(Error::InvalidArgument("need 1 ≤ 𝐦 ≤ 6"));
    }
    if j > mm {
        return Err(Error::InvalidArgument("need j ≤ 𝐦"));
    }
    Ok(())
}

/// Rows j′ = 1..𝐦; derivative columns of order 0..𝐦−j−1 at a, then 0..j−1 at
/// b. The a-block uses −iM̃ when `tilde_a`.
fn assemble_p(frame: &OneCutFrame, a: f64, b: f64, mm: usize, j: usize, tilde_a: bool) -> Result<RMatrix> {
    check_mm(mm, j)?;
    frame.check(a)?;
    frame.check(b)?;
    if j > 0 && j < mm && (a - b).abs() < MIN_GAP {
        return Err(Error::InvalidArgument("a and b must be distinct"));
    }
    let na = mm - j;
    let mut p = DMatrix::zeros(mm, mm);
    for row in 0..mm {
        let idx = row as i32 + 1;
        if na > 0 {
            let d = frame.derivatives(idx, a, na - 1, tilde_a)?;
            for (c, v) in d.into_iter().enumerate() {
                p[(row, c)] = v;
            }
        }
        if j > 0 {
            let d = frame.derivatives(idx, b, j - 1, false)?;
            for (c, v) in d.into_iter().enumerate() {
                p[(row, na + c)] = v;
            }
        }
    }
    Ok(p)
}

/// 𝔓^{(a, 𝐦−j),(b, j)}.
pub fn frak_p(frame: &OneCutFrame, a: f64, b: f64, mm: usize, j: usize) -> Result<RMatrix> {
    assemble_p(frame, a, b, mm, j, false)
}

/// 𝔓^{(b, j)}_{(a, 𝐦−j)} with each M̃ column multiplied by −i, so the matrix
/// is real: its determinant is (−i)^{𝐦−j} det 𝔓^{(b, j)}_{(a, 𝐦−j)}.
pub fn frak_p_tilde(frame: &OneCutFrame, a: f64, b: f64, mm: usize, j: usize) -> Result<RMatrix> {
    assemble_p(frame, a, b, mm, j, true)
}

/// 𝔔_{(0, 𝐦−j),(c, j)}(α): rows (1, α, …, α^{𝐦−j−1}, e^{cα}, …, α^{j−1}e^{cα}).
pub fn frak_q(c: f64, mm: usize, j: usize, alphas: &[f64]) -> Result<RMatrix> {
    check_mm(mm, j)?;
    if c == 0.0 || !c.is_finite() {
        return Err(Error::InvalidArgument("c must be a nonzero real"));
    }
    if alphas.len() != mm {
        return Err(Error::InvalidArgument("need 𝐦 parameters"));
    }
    for k in 0..mm {
        for i in 0..k {
            let gap = (alphas[k] - alphas[i]).abs();
            if gap <= MIN_GAP {
                return Err(Error::ConfluentAlphas(gap));
            }
        }
    }
    let na = mm - j;
    Ok(DMatrix::from_fn(mm, mm, |r, col| {
        let a = alphas[r];
        if col < na {
            a.powi(col as i32)
        } else {
            a.powi((col - na) as i32) * (c * a).exp()
        }
    }))
}

/// The scaling a_k(n) = a − q log(K n)/n + α_k/n of the spikes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpScaling {
    pub mm: usize,
    pub m: usize,
    pub q: f64,
    pub k: f64,
}

impl JumpScaling {
    pub fn spikes(&self, a: f64, n: usize, alphas: &[f64]) -> Vec<f64> {
        let nf = n as f64;
        alphas.iter().map(|al| a - self.q * (self.k * nf).ln() / nf + al / nf).collect()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn scaling(span: f64, lower: f64, upper: f64, mm: usize, m: usize) -> Result<JumpScaling> {
    if mm == 0 || mm > MAX_M || m == 0 || m > mm {
        return Err(Error::InvalidArgument("need 1 ≤ m ≤ 𝐦 ≤ 6"));
    }
    if !(span > 0.0) {
        return Err(Error::InvalidArgument("the two points must be increasing"));
    }
    if !(lower > 0.0 && upper > 0.0) {
        return Err(Error::InvalidArgument("curvatures must have the stated signs"));
    }
    let e = mm as i64 - 2 * m as i64 + 1;
    let q = e as f64 / span;
    if e == 0 {
        return Err(Error::ZeroExponent);
    }
    let inner = factorial(mm - m) / factorial(m - 1) * lower.powf((mm - m) as f64 + 0.5) / upper.powf(m as f64 - 0.5);
    Ok(JumpScaling { mm, m, q, k: inner.powf(1.0 / e as f64) })
}

/// (q_m, K_m) at a secondary critical value with maximisers x1 < x2.
pub fn jump_scaling(x1: f64, x2: f64, g2_1: f64, g2_2: f64, mm: usize, m: usize) -> Result<JumpScaling> {
    scaling(x2 - x1, -g2_1, -g2_2, mm, m)
}

/// (q̃_m, K̃_m) at a discontinuous critical value a_c.
pub fn jump_scaling_tilde(c_ac: f64, x0_ac: f64, h2: f64, g2: f64, mm: usize, m: usize) -> Result<JumpScaling> {
    scaling(x0_ac - c_ac, h2, -g2, mm, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    /// Two tied maxima x1 < x2 of G.
    Secondary,
    /// a_c < V′(e)/2: c(a_c) and x0(a_c).
    Critical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionResult {
    pub kind: TransitionKind,
    pub mm: usize,
    pub m: usize,
    pub p: f64,
    pub det_p_prev: f64,
    pub det_p: f64,
    pub det_q_prev: f64,
    pub det_q: f64,
    /// det P_m det Q_m / (det P_{m−1} det Q_{m−1}).
    pub odds: f64,
}

fn check_descending(alphas: &[f64]) -> Result<()> {
    if alphas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidArgument("alphas must be strictly descending"));
    }
    Ok(())
}

fn finish(kind: TransitionKind, mm: usize, m: usize, d: [f64; 4]) -> Result<TransitionResult> {
    let [det_p_prev, det_q_prev, det_p, det_q] = d;
    let prev = det_p_prev * det_q_prev;
    let next = det_p * det_q;
    if prev == 0.0 || !prev.is_finite() || !next.is_finite() {
        return Err(Error::SingularDenominator);
    }
    let odds = next / prev;
    Ok(TransitionResult { kind, mm, m, p: 1.0 / (1.0 + odds), det_p_prev, det_p, det_q_prev, det_q, odds })
}

/// p_m with P_ℓ = 𝔓^{(x1, 𝐦−ℓ),(x2, ℓ)} and Q_ℓ = 𝔔_{(0, 𝐦−ℓ),(x2−x1, ℓ)}(α).
pub fn p_m(frame: &OneCutFrame, x1: f64, x2: f64, mm: usize, m: usize, alphas: &[f64]) -> Result<TransitionResult> {
    if m == 0 || m > mm {
        return Err(Error::InvalidArgument("need 1 ≤ m ≤ 𝐦"));
    }
    if !(x1 < x2) {
        return Err(Error::InvalidArgument("need x1 < x2"));
    }
    check_descending(alphas)?;
    let c = x2 - x1;
    let d = |l: usize| -> Result<(f64, f64)> {
        Ok((det_r(&frak_p(frame, x1, x2, mm, l)?), det_r(&frak_q(c, mm, l, alphas)?)))
    };
    let (p0, q0) = d(m - 1)?;
    let (p1, q1) = d(m)?;
    finish(TransitionKind::Secondary, mm, m, [p0, q0, p1, q1])
}

/// det P̃_ℓ as the real number (−i)^{𝐦−ℓ} det 𝔓^{(x0, ℓ)}_{(c, 𝐦−ℓ)}, times
/// the orientation sign (−1)^{t(t−1)/2}, t = 𝐦 − ℓ, of the M̃ block.
fn det_p_tilde(frame: &OneCutFrame, c: f64, x0: f64, mm: usize, l: usize) -> Result<f64> {
    let t = mm - l;
    let sign = if (t * t.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * det_r(&frak_p_tilde(frame, c, x0, mm, l)?))
}

/// p̃_m at a discontinuous critical value, from c = c(a_c) and x0 = x0(a_c).
pub fn p_tilde_m(frame: &OneCutFrame, c_ac: f64, x0_ac: f64, mm: usize, m: usize, alphas: &[f64]) -> Result<TransitionResult> {
    if m == 0 || m > mm {
        return Err(Error::InvalidArgument("need 1 ≤ m ≤ 𝐦"));
    }
    if !(c_ac < x0_ac) {
        return Err(Error::InvalidArgument("need c(a_c) < x0(a_c)"));
    }
    check_descending(alphas)?;
    let span = x0_ac - c_ac;
    let d = |l: usize| -> Result<(f64, f64)> {
        Ok((det_p_tilde(frame, c_ac, x0_ac, mm, l)?, det_r(&frak_q(span, mm, l, alphas)?)))
    };
    let (p0, q0) = d(m - 1)?;
    let (p1, q1) = d(m)?;
    finish(TransitionKind::Critical, mm, m, [p0, q0, p1, q1])
}

/// Where the k-th eigenvalue is observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Point {
    /// x2(a), or x0(a_c) in the critical case.
    Upper,
    /// x1(a); secondary case only.
    Lower,
    /// The edge e at the n^{−2/3} scale; critical case only.
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// The constant 1.
    One,
    /// G^{(j)}_k; taken as 1 when j > k, in particular for k = 0.
    Gue { j: usize, k: usize },
    /// F^{(j)}_TW.
    TracyWidom { j: usize },
}

impl Component {
    pub fn cdf(&self, t: f64) -> Result<f64> {
        match *self {
            Component::One => Ok(1.0),
            Component::Gue { j, k } if j > k => Ok(1.0),
            Component::Gue { j, k } => gk_jth(t, j, k),
            Component::TracyWidom { j } => tw_jth(t, j),
        }
    }
}

/// Σ w_i F_i(T).
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePrediction {
    pub terms: Vec<(f64, Component)>,
}

impl MixturePrediction {
    pub fn cdf(&self, t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (w, c) in &self.terms {
            if *w != 0.0 {
                acc += w * c.cdf(t)?;
            }
        }
        Ok(acc)
    }

    /// The value as T → ∞.
    pub fn total_mass(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w).sum()
    }
}

/// The limiting law of the k-th largest eigenvalue, centred at `point`.
pub fn mixture_prediction(result: &TransitionResult, k: usize, point: Point) -> Result<MixturePrediction> {
    let (mm, m, p) = (result.mm, result.m, result.p);
    let q = 1.0 - p;
    let gue = |j, k| Component::Gue { j, k };
    let terms = match (result.kind, point) {
        (_, Point::Upper) if k >= 1 && k < m => alloc::vec![(p, gue(k, m - 1)), (q, gue(k, m))],
        (_, Point::Upper) if k == m => alloc::vec![(p, Component::One), (q, gue(m, m))],
        (TransitionKind::Secondary, Point::Lower) if k == m => alloc::vec![(p, gue(1, mm - m + 1))],
        (TransitionKind::Secondary, Point::Lower) if k > m && k <= mm => {
            alloc::vec![(p, gue(k - m + 1, mm - m + 1)), (q, gue(k - m, mm - m))]
        }
        (TransitionKind::Critical, Point::Edge) if k == m => alloc::vec![(p, Component::TracyWidom { j: 1 })],
        _ => return Err(Error::CaseOutOfRange),
    };
    Ok(MixturePrediction { terms })
}
