//! Taylor data at s = 1 of functions analytic in s, from the Cauchy integral
//! over the circle |s − 1| = ρ sampled by the trapezoid rule.
//!
//! Nodes sit at angles 2π(m + ½)/M so none lands on the real axis, where
//! resolvent-type quantities have their poles.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::Result;

pub const RADIUS: f64 = 0.5;
pub const NODES: usize = 64;

pub fn contour(nodes: usize, radius: f64) -> Vec<Complex64> {
    (0..nodes)
        .map(|m| {
            let th = 2.0 * PI * (m as f64 + 0.5) / nodes as f64;
            Complex64::new(1.0, 0.0) + Complex64::from_polar(radius, th)
        })
        .collect()
}

/// c_i = f^{(i)}(1)/i! for i < count, using f(s̄) = conj f(s) to halve the
/// number of evaluations.
pub fn taylor_at_one<F>(mut f: F, count: usize) -> Result<Vec<Complex64>>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let m = NODES;
    let pts = contour(m, RADIUS);
    let mut vals = alloc::vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m / 2 {
        let v = f(pts[k])?;
        vals[k] = v;
        vals[m - 1 - k] = v.conj();
    }
    Ok(coefficients(&pts, &vals, count))
}

/// Same without assuming conjugate symmetry.
pub fn taylor_at_one_general<F>(mut f: F, count: usize) -> Result<Vec<Complex64>>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let pts = contour(NODES, RADIUS);
    let vals = pts.iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
    Ok(coefficients(&pts, &vals, count))
}

fn coefficients(pts: &[Complex64], vals: &[Complex64], count: usize) -> Vec<Complex64> {
    let m = pts.len() as f64;
    (0..count)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, v) in pts.iter().zip(vals) {
                acc += v * (s - 1.0).powi(-(i as i32));
            }
            acc / m
        })
        .collect()
}

/// Σ_{i<j} (−1)^i f^{(i)}(1)/i!, the probability of at most j − 1 points.
pub fn jth_sum(coeffs: &[Complex64], j: usize) -> Complex64 {
    coeffs
        .iter()
        .take(j)
        .enumerate()
        .map(|(i, c)| if i % 2 == 0 { *c } else { -c })
        .sum()
}

/// Real part of the j-th sum for a conjugate-symmetric f.
pub fn jth<F>(f: F, j: usize) -> Result<f64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    if j == 1 {
        // no derivatives needed
        let mut f = f;
        return f(Complex64::new(1.0, 0.0)).map(|v| v.re);
    }
    let c = taylor_at_one(f, j)?;
    Ok(jth_sum(&c, j).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_coefficients() {
        // (1 − s/3)(1 − s/2) expanded at s = 1
        let f = |s: Complex64| Ok((1.0 - s / 3.0) * (1.0 - s / 2.0));
        let c = taylor_at_one(f, 4).unwrap();
        assert!((c[0].re - 1.0 / 3.0).abs() < 1e-15);
        assert!((c[1].re + 0.5).abs() < 1e-14);
        assert!((c[2].re - 1.0 / 6.0).abs() < 1e-14);
        assert!(c[3].norm() < 1e-14);
        // at most one of two independent points with probabilities 1/3, 1/2
        let p = jth(f, 2).unwrap();
        assert!((p - (1.0 - 1.0 / 6.0)).abs() < 1e-14);
    }

    #[test]
    fn exponential_matches_general() {
        let f = |s: Complex64| Ok((s * 0.7).exp());
        let a = taylor_at_one(f, 6).unwrap();
        let b = taylor_at_one_general(f, 6).unwrap();
        let mut fact = 1.0;
        for i in 0..6 {
            if i > 0 {
                fact *= i as f64;
            }
            let exact = 0.7f64.powi(i as i32) * 0.7f64.exp() / fact;
            assert!((a[i].re - exact).abs() < 1e-14);
            assert!((a[i] - b[i]).norm() < 1e-14);
        }
    }
}
