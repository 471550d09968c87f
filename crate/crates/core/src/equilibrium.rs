//! One-cut equilibrium measure of a polynomial potential.
//!
//! On the support [ẽ, e] = [c₀ − r, c₀ + r] the density is
//! Ψ(x) = h(x) √((x − ẽ)(e − x)) / 2π with h the polynomial part of
//! V′(x)/√((x − ẽ)(x − e)) at infinity. The endpoints solve
//!
//!   (1/π) ∫₀^π V′(c₀ + r cos θ) dθ = 0,
//!   (1/π) ∫₀^π V′(c₀ + r cos θ) r cos θ dθ = 2.
//!
//! The log-potential g(x) = ∫ log|x − s| Ψ(s) ds is evaluated from the finite
//! Chebyshev expansion of Ψ: with u = (x − c₀)/r and μ_k = ∫ T_k((s−c₀)/r) Ψ(s) ds,
//!
//!   g = log r + log(|ζ|/2) − Σ (2/k) μ_k ζ^{−k},   |u| > 1, ζ = u ± √(u² − 1),
//!   g = log r − log 2 − Σ (2/k) μ_k T_k(u),        |u| ≤ 1,
//!
//! and μ_k vanishes for k > deg V.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::potential::{horner, Potential};
use crate::quadrature::{chebyshev_angles, composite};
use crate::{Error, Result};

const NEWTON_TOL: f64 = 1e-12;
const ANGLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumData {
    pub potential: Potential,
    /// ẽ
    pub left_endpoint: f64,
    /// e
    pub right_endpoint: f64,
    pub robin_constant: f64,
    pub beta: f64,
    center: f64,
    radius: f64,
    /// h in ascending monomial coefficients
    h: Vec<f64>,
    /// μ_0..μ_{deg V}
    mu: Vec<f64>,
}

/// Residual and Jacobian of the endpoint conditions in (c₀, r).
fn conditions(v: &Potential, c0: f64, r: f64, th: &[f64]) -> ([f64; 2], [[f64; 2]; 2]) {
    let n = th.len() as f64;
    let (mut f0, mut f1) = (0.0, 0.0);
    let mut j = [[0.0; 2]; 2];
    for &t in th {
        let ct = t.cos();
        let x = c0 + r * ct;
        let d1 = v.dv(x);
        let d2 = v.d2v(x);
        f0 += d1;
        f1 += d1 * r * ct;
        j[0][0] += d2;
        j[0][1] += d2 * ct;
        j[1][0] += d2 * r * ct;
        j[1][1] += d2 * r * ct * ct + d1 * ct;
    }
    for row in j.iter_mut() {
        for e in row.iter_mut() {
            *e /= n;
        }
    }
    ([f0 / n, f1 / n - 2.0], j)
}

/// Solves for the one-cut equilibrium measure.
pub fn solve_equilibrium(v: &Potential) -> Result<EquilibriumData> {
    let th = chebyshev_angles(ANGLES);
    let r0 = v.max_critical_modulus() + 1.0;
    let (mut c0, mut r) = (0.0f64, r0);
    let mut converged = false;
    let norm = |f: [f64; 2]| f[0].abs().max(f[1].abs());
    for _ in 0..200 {
        let (f, j) = conditions(v, c0, r, &th);
        if norm(f) < NEWTON_TOL {
            converged = true;
            break;
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence("singular Jacobian in endpoint solve"));
        }
        let dc = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dr = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let mut lambda = 1.0;
        loop {
            let (nc, nr) = (c0 - lambda * dc, r - lambda * dr);
            if nr > 0.0 {
                let (nf, _) = conditions(v, nc, nr, &th);
                if norm(nf) < norm(f) || lambda < 1e-10 {
                    c0 = nc;
                    r = nr;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::NoConvergence("damped Newton stalled"));
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence("endpoint solve"));
    }
    build(v, c0, r)
}

fn build(v: &Potential, c0: f64, r: f64) -> Result<EquilibriumData> {
    let dv = v.dv_coeffs();
    let deg_dv = dv.len() - 1;
    // moments m_j = (1/π) ∫₀^π (c₀ + r cos θ)^j dθ, exact on these angles
    let th = chebyshev_angles(ANGLES);
    let mut m = alloc::vec![0.0; deg_dv + 1];
    for &t in &th {
        let x = c0 + r * t.cos();
        let mut p = 1.0;
        for mj in m.iter_mut() {
            *mj += p;
            p *= x;
        }
    }
    for mj in m.iter_mut() {
        *mj /= ANGLES as f64;
    }
    let mut h = alloc::vec![0.0; deg_dv.max(1)];
    for (i, hi) in h.iter_mut().enumerate() {
        for k in (i + 1)..=deg_dv {
            *hi += dv[k] * m[k - 1 - i];
        }
    }

    // μ_k by Gauss–Chebyshev of the second kind, exact for this degree.
    let deg = v.degree();
    let nq = 2 * deg + 8;
    let mut mu = alloc::vec![0.0; deg + 1];
    for j in 1..=nq {
        let t = j as f64 * PI / (nq + 1) as f64;
        let (s, c) = t.sin_cos();
        let w = PI / (nq + 1) as f64 * s * s;
        let hv = horner(&h, c0 + r * c);
        let mut tkm1 = 1.0;
        let mut tk = c;
        mu[0] += w * hv;
        for (k, muk) in mu.iter_mut().enumerate().skip(1) {
            if k > 1 {
                let next = 2.0 * c * tk - tkm1;
                tkm1 = tk;
                tk = next;
            }
            *muk += w * hv * tk;
        }
    }
    for muk in mu.iter_mut() {
        *muk *= r * r / (2.0 * PI);
    }

    let mut eq = EquilibriumData {
        potential: v.clone(),
        left_endpoint: c0 - r,
        right_endpoint: c0 + r,
        robin_constant: 0.0,
        beta: 0.0,
        center: c0,
        radius: r,
        h,
        mu,
    };
    eq.robin_constant = 2.0 * eq.g_real(c0) - v.v(c0);
    let edge = horner(&eq.h, eq.right_endpoint) * (2.0 * r).sqrt() / 2.0;
    if !(edge > 0.0) {
        return Err(Error::MultiCut(eq.right_endpoint));
    }
    eq.beta = edge.powf(2.0 / 3.0);
    eq.check_one_cut()?;
    Ok(eq)
}

impl EquilibriumData {
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Coefficients of h, ascending.
    pub fn h_coeffs(&self) -> &[f64] {
        &self.h
    }

    pub fn h(&self, x: f64) -> f64 {
        horner(&self.h, x)
    }

    fn h_prime(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..self.h.len()).rev() {
            acc = acc * x + k as f64 * self.h[k];
        }
        acc
    }

    /// Chebyshev moments μ_k of Ψ.
    pub fn chebyshev_moments(&self) -> &[f64] {
        &self.mu
    }

    /// Ψ(x); zero off the support.
    pub fn density(&self, x: f64) -> f64 {
        let (a, b) = (self.left_endpoint, self.right_endpoint);
        if x <= a || x >= b {
            return 0.0;
        }
        self.h(x) * ((x - a) * (b - x)).sqrt() / (2.0 * PI)
    }

    /// g(x) for x > e.
    pub fn g_func(&self, x: f64) -> Result<f64> {
        if !(x > self.right_endpoint) {
            return Err(Error::DomainError(x));
        }
        Ok(self.g_real(x))
    }

    /// ∫ log|x − s| Ψ(s) ds for any real x (the real part of g).
    pub fn g_real(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.radius;
        let lr = self.radius.ln();
        if u.abs() <= 1.0 {
            let mut acc = 0.0;
            let (mut tkm1, mut tk) = (1.0, u);
            for k in 1..self.mu.len() {
                if k > 1 {
                    let next = 2.0 * u * tk - tkm1;
                    tkm1 = tk;
                    tk = next;
                }
                acc += 2.0 / k as f64 * self.mu[k] * tk;
            }
            lr - core::f64::consts::LN_2 - acc
        } else {
            let root = (u * u - 1.0).sqrt();
            let zeta = if u > 0.0 { u + root } else { u - root };
            let inv = 1.0 / zeta;
            let mut acc = 0.0;
            let mut p = 1.0;
            for k in 1..self.mu.len() {
                p *= inv;
                acc += 2.0 / k as f64 * self.mu[k] * p;
            }
            lr + (zeta.abs() / 2.0).ln() - acc
        }
    }

    /// √((x − ẽ)(x − e)) for x ≥ e.
    fn outer_root(&self, x: f64) -> f64 {
        ((x - self.left_endpoint) * (x - self.right_endpoint)).max(0.0).sqrt()
    }

    /// g′(x) for x ≥ e. Near the edge from g′ = (V′ − h√((x−ẽ)(x−e)))/2;
    /// further out that difference cancels, and the Chebyshev series
    /// g′ = (1 + 2Σ μ_k ζ^{−k}) / (r√(u² − 1)) is used instead.
    pub fn g_prime(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.radius;
        if u <= 2.0 {
            return 0.5 * (self.potential.dv(x) - self.h(x) * self.outer_root(x));
        }
        let root = (u * u - 1.0).sqrt();
        let inv = 1.0 / (u + root);
        let mut acc = 1.0;
        let mut p = 1.0;
        for k in 1..self.mu.len() {
            p *= inv;
            acc += 2.0 * self.mu[k] * p;
        }
        acc / (self.radius * root)
    }

    /// φ = V′ − g′ on [e, ∞); G′(x; a) = a − φ(x).
    pub fn phi(&self, x: f64) -> f64 {
        0.5 * (self.potential.dv(x) + self.h(x) * self.outer_root(x))
    }

    /// φ′ on (e, ∞); G″(x; a) = −φ′(x).
    pub fn phi_prime(&self, x: f64) -> f64 {
        let s = self.outer_root(x);
        let ds = (2.0 * x - self.left_endpoint - self.right_endpoint) / (2.0 * s);
        0.5 * (self.potential.d2v(x) + self.h_prime(x) * s + self.h(x) * ds)
    }

    /// ∫_e^c h(t)√((t−ẽ)(t−e)) dt = −(2g − V − ℓ)(c) for c ≥ e.
    pub fn outer_excess(&self, c: f64) -> f64 {
        let e = self.right_endpoint;
        if c <= e {
            return 0.0;
        }
        // t = e + w² removes the square-root endpoint
        let wmax = (c - e).sqrt();
        let panels = 1 + (wmax / 0.5) as usize;
        let rule = composite(&[0.0, wmax], panels, 24).expect("valid interval");
        let mut acc = 0.0;
        for (&w, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let t = e + w * w;
            acc += wt * self.h(t) * (t - self.left_endpoint).sqrt() * 2.0 * w * w;
        }
        acc
    }

    /// Rejects solutions of the endpoint equations that are not the
    /// equilibrium measure: h must stay nonnegative on the support and
    /// 2g − V − ℓ must stay ≤ 0 outside it.
    fn check_one_cut(&self) -> Result<()> {
        let (a, b) = (self.left_endpoint, self.right_endpoint);
        let scale = self.h.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1.0);
        for i in 0..=2000 {
            let x = a + (b - a) * i as f64 / 2000.0;
            if self.h(x) < -1e-12 * scale {
                return Err(Error::MultiCut(x));
            }
        }
        let reach = 4.0 * self.radius + 1.0;
        for i in 1..=2000 {
            let d = reach * i as f64 / 2000.0;
            for x in [a - d, b + d] {
                let ex = 2.0 * self.g_real(x) - self.potential.v(x) - self.robin_constant;
                if ex > 1e-9 * (1.0 + self.potential.v(x).abs()) {
                    return Err(Error::MultiCut(x));
                }
            }
        }
        Ok(())
    }
}
