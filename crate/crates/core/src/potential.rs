//! Confining potentials V.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// V(x) = x²/2
    Gaussian,
    /// V(x) = Σ c_k x^k, coefficients in ascending order.
    Polynomial(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub kind: PotentialKind,
    /// Caller's claim that V is convex on [e, ∞). Only used to short-cut the
    /// secondary-critical scan; the phase search itself never relies on it.
    pub convex_beyond_edge: Option<bool>,
    coeffs: Vec<f64>,
}

impl Potential {
    pub fn gaussian() -> Self {
        Potential {
            kind: PotentialKind::Gaussian,
            convex_beyond_edge: Some(true),
            coeffs: alloc::vec![0.0, 0.0, 0.5],
        }
    }

    /// Polynomial potential; the degree must be even with a positive leading
    /// coefficient and V must beat 2|x| at infinity.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        let mut c: Vec<f64> = coeffs.to_vec();
        while c.len() > 1 && *c.last().unwrap() == 0.0 {
            c.pop();
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient"));
        }
        let deg = c.len().saturating_sub(1);
        if deg < 2 || deg % 2 == 1 || c[deg] <= 0.0 {
            return Err(Error::NonConfining);
        }
        let p = Potential {
            kind: PotentialKind::Polynomial(c.clone()),
            convex_beyond_edge: None,
            coeffs: c,
        };
        p.check_growth()?;
        Ok(p)
    }

    pub fn with_convex_hint(mut self, hint: Option<bool>) -> Self {
        self.convex_beyond_edge = hint;
        self
    }

    /// Ascending monomial coefficients (the Gaussian is [0, 0, 1/2]).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn v(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }

    pub fn dv(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..self.coeffs.len()).rev() {
            acc = acc * x + k as f64 * self.coeffs[k];
        }
        acc
    }

    pub fn d2v(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (2..self.coeffs.len()).rev() {
            acc = acc * x + (k * (k - 1)) as f64 * self.coeffs[k];
        }
        acc
    }

    /// Coefficients of V′ in ascending order.
    pub fn dv_coeffs(&self) -> Vec<f64> {
        (1..self.coeffs.len()).map(|k| k as f64 * self.coeffs[k]).collect()
    }

    /// Cauchy bound on the roots of V(x) ∓ 2x, beyond which V > 2|x|.
    pub fn growth_bound(&self) -> f64 {
        let d = self.degree();
        let lead = self.coeffs[d];
        let mut m: f64 = 0.0;
        for (k, &c) in self.coeffs[..d].iter().enumerate() {
            let c = if k == 1 { c.abs() + 2.0 } else { c.abs() };
            m = m.max(c / lead);
        }
        1.0 + m
    }

    fn check_growth(&self) -> Result<()> {
        let r = self.growth_bound();
        for i in 0..=200 {
            let x = r * (1.0 + 9.0 * i as f64 / 200.0);
            if self.v(x) <= 2.0 * x || self.v(-x) <= 2.0 * x {
                return Err(Error::NonConfining);
            }
        }
        Ok(())
    }

    /// Largest modulus among the roots of V′, from the companion matrix.
    pub fn max_critical_modulus(&self) -> f64 {
        let mut d = self.dv_coeffs();
        while d.len() > 1 && d[0] == 0.0 {
            // roots at the origin contribute modulus 0
            d.remove(0);
        }
        let n = d.len() - 1;
        if n == 0 {
            return 0.0;
        }
        let lead = d[n];
        let comp = DMatrix::from_fn(n, n, |i, j| {
            if i == 0 {
                -d[n - 1 - j] / lead
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        comp.complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_evaluators() {
        let v = Potential::gaussian();
        assert_eq!(v.v(2.0), 2.0);
        assert_eq!(v.dv(2.0), 2.0);
        assert_eq!(v.d2v(-3.0), 1.0);
        assert_eq!(v.max_critical_modulus(), 0.0);
    }

    #[test]
    fn rejects_bad_polynomials() {
        assert_eq!(Potential::polynomial(&[0.0, 1.0, 0.0, 1.0]), Err(Error::NonConfining));
        assert_eq!(Potential::polynomial(&[0.0, 0.0, -1.0]), Err(Error::NonConfining));
        assert_eq!(Potential::polynomial(&[1.0]), Err(Error::NonConfining));
        assert!(Potential::polynomial(&[0.0, 0.0, 0.0, 0.0, 0.25]).is_ok());
    }

    #[test]
    fn critical_modulus() {
        // V′ = x³ − 4x has roots 0, ±2
        let v = Potential::polynomial(&[0.0, 0.0, -2.0, 0.0, 0.25]).unwrap();
        assert!((v.max_critical_modulus() - 2.0).abs() < 1e-12);
    }
}
