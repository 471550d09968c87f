//! The contour function
//!
//!   C_α(ξ) = (1/2π) ∫_Γ e^{i z³/3 + i ξ z} dz / (α + i z),
//!
//! Γ running from ∞e^{5πi/6} to ∞e^{πi/6} with the pole z = iα above it for
//! every real α, which makes C_α entire in α.
//!
//! The integral is taken over a deformed contour: two rays at angles 5π/6 and
//! π/6, attached at height √ξ for ξ ≥ 0 (through the saddle) or joined by a
//! horizontal segment between ±√|ξ| for ξ < 0. When this moves the contour
//! across the pole the residue e^{α³/3 − αξ} is added back.
//!
//! It satisfies C′ + αC = Ai and
//! C_α(ξ) = e^{α³/3 − αξ} − ∫_ξ^∞ e^{α(t−ξ)} Ai(t) dt.
//! For α < 0 the first term grows like e^{|α|ξ}.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Distance kept between the numerical contour and the pole.
const POLE_GAP: f64 = 0.25;
/// Rays are cut where the integrand has dropped by e^{-40}.
const DROP: f64 = 40.0;
const PANEL: f64 = 0.5;

/// Result of one contour evaluation with its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourEval {
    pub alpha: f64,
    pub xi: f64,
    pub ray_angle: f64,
    pub node_count: usize,
    pub residue_added: bool,
    pub value: f64,
    pub imag: f64,
}

/// C_α(ξ) for |α| ≤ 10 and |ξ| ≤ 40, 32-node panels.
pub fn c_alpha(xi: f64, alpha: f64) -> Result<f64> {
    c_alpha_eval(xi, alpha, 32).map(|e| e.value)
}

/// Full evaluation with a chosen number of nodes per panel.
pub fn c_alpha_eval(xi: f64, alpha: f64, nodes: usize) -> Result<ContourEval> {
    if !(alpha.abs() <= 10.0) {
        return Err(Error::DomainError(alpha));
    }
    if !(xi.abs() <= 40.0) {
        return Err(Error::DomainError(xi));
    }
    contour(xi, alpha, nodes)
}

/// Unchecked variant for Nyström grids, which reach far beyond ξ = 40.
/// There the contour integral has underflowed and only the residue remains.
pub fn c_alpha_grid(xi: f64, alpha: f64) -> Result<f64> {
    if xi > 60.0 {
        return Ok((alpha * alpha * alpha / 3.0 - alpha * xi).exp());
    }
    contour(xi, alpha, 32).map(|e| e.value)
}

fn exponent(z: Complex64, xi: f64) -> Complex64 {
    Complex64::i() * (z * z * z / 3.0 + z * xi)
}

fn integrand(z: Complex64, xi: f64, alpha: f64) -> Complex64 {
    exponent(z, xi).exp() / (Complex64::new(alpha, 0.0) + Complex64::i() * z)
}

fn contour(xi: f64, alpha: f64, nodes: usize) -> Result<ContourEval> {
    let base = if xi >= 0.0 { xi.sqrt() } else { 0.0 };
    let height = if (alpha - base).abs() < POLE_GAP { alpha - POLE_GAP } else { base };
    // The pole is above the true contour; add it back when the numerical
    // contour has passed over it.
    let residue_added = alpha < height;

    let half = if xi < 0.0 { (-xi).sqrt() } else { 0.0 };
    let left = Complex64::new(-half, height);
    let right = Complex64::new(half, height);
    let rule = gauss_legendre(nodes, 0.0, 1.0)?;

    let mut total = Complex64::new(0.0, 0.0);

    // Horizontal segment, panels short enough to follow the oscillation.
    if half > 0.0 {
        let len = 2.0 * half;
        let panel = PANEL.min(4.0 / xi.abs().max(1.0));
        let np = (len / panel).ceil() as usize;
        let step = len / np as f64;
        for p in 0..np {
            let x0 = -half + step * p as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                let z = Complex64::new(x0 + step * u, height);
                acc += integrand(z, xi, alpha) * w;
            }
            total += acc * step;
        }
    }

    // Outgoing ray at π/6 from `right`, incoming ray at 5π/6 into `left`.
    let dir_r = Complex64::from_polar(1.0, PI / 6.0);
    let dir_l = Complex64::from_polar(1.0, 5.0 * PI / 6.0);
    total += ray(right, dir_r, xi, alpha, &rule.nodes, &rule.weights) * dir_r;
    total -= ray(left, dir_l, xi, alpha, &rule.nodes, &rule.weights) * dir_l;

    let mut value = total / (2.0 * PI);
    if residue_added {
        value += Complex64::new((alpha * alpha * alpha / 3.0 - alpha * xi).exp(), 0.0);
    }
    if value.im.abs() > 1e-10 * (1.0 + value.re.abs()) {
        return Err(Error::NotReal(value.im));
    }
    Ok(ContourEval {
        alpha,
        xi,
        ray_angle: PI / 6.0,
        node_count: nodes,
        residue_added,
        value: value.re,
        imag: value.im,
    })
}

/// ∫_0^R f(start + r·dir) dr, with R where the integrand has decayed.
fn ray(start: Complex64, dir: Complex64, xi: f64, alpha: f64, nodes: &[f64], weights: &[f64]) -> Complex64 {
    let ref_level = exponent(start, xi).re;
    let mut panels: Vec<(f64, f64)> = Vec::new();
    let mut r = 0.0;
    loop {
        panels.push((r, r + PANEL));
        r += PANEL;
        if exponent(start + dir * r, xi).re < ref_level - DROP || r > 200.0 {
            break;
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (a, b) in panels {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&u, &w) in nodes.iter().zip(weights) {
            let z = start + dir * (a + (b - a) * u);
            acc += integrand(z, xi, alpha) * w;
        }
        total += acc * (b - a);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_bookkeeping() {
        let e = c_alpha_eval(4.0, 1.0, 32).unwrap();
        assert!(e.residue_added);
        let e = c_alpha_eval(4.0, -1.0, 32).unwrap();
        assert!(e.residue_added);
        let e = c_alpha_eval(1.0, 3.0, 32).unwrap();
        assert!(!e.residue_added);
        let e = c_alpha_eval(0.0, 0.0, 32).unwrap();
        assert!(!e.residue_added);
        assert!(c_alpha(41.0, 1.0).is_err());
        assert!(c_alpha(0.0, 10.5).is_err());
    }

    #[test]
    fn alpha_zero_is_airy_cdf() {
        // C_0(ξ) = ∫_{-∞}^ξ Ai, and ∫_{-∞}^0 Ai = 2/3.
        let v = c_alpha(0.0, 0.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12, "{v}");
    }
}
