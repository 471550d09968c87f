//! Gauss–Legendre rules and a few composite and adaptive drivers built on them.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result};

/// Nodes and weights of a quadrature rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre polynomial P_n(x) and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Standard rule on [-1, 1], nodes ascending.
fn standard(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi's initial guess, then Newton.
        let theta = PI * (4.0 * i as f64 + 3.0) / (4.0 * nf + 2.0);
        let mut z = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d.is_finite() {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule with `n` nodes on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one node"));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInterval(a, b));
    }
    let (x, w) = standard(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    Ok(QuadratureRule {
        nodes: x.iter().map(|&t| c + h * t).collect(),
        weights: w.iter().map(|&v| h * v).collect(),
        a,
        b,
    })
}

/// Composite rule: `panels` equal panels of `n` nodes each on every interval
/// between consecutive breakpoints.
pub fn composite(breaks: &[f64], panels: usize, n: usize) -> Result<QuadratureRule> {
    if breaks.len() < 2 || panels == 0 {
        return Err(Error::InvalidArgument("composite rule needs two breakpoints"));
    }
    let (x, w) = standard(n);
    let mut nodes = Vec::with_capacity((breaks.len() - 1) * panels * n);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if !(lo < hi) {
            return Err(Error::InvalidInterval(lo, hi));
        }
        let step = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a = lo + step * p as f64;
            let h = 0.5 * step;
            let c = a + h;
            for (t, v) in x.iter().zip(&w) {
                nodes.push(c + h * t);
                weights.push(h * v);
            }
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        a: breaks[0],
        b: breaks[breaks.len() - 1],
    })
}

/// Adaptive Gauss–Legendre: 10 vs 20 nodes per panel, bisecting until the
/// panel estimates agree to `tol` (absolute, split across panels).
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidInterval(a, b));
    }
    let (x1, w1) = standard(10);
    let (x2, w2) = standard(20);
    let est = |lo: f64, hi: f64, f: &mut F| {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        let s1: f64 = x1.iter().zip(&w1).map(|(t, w)| w * f(c + h * t)).sum::<f64>() * h;
        let s2: f64 = x2.iter().zip(&w2).map(|(t, w)| w * f(c + h * t)).sum::<f64>() * h;
        (s1, s2)
    };
    let mut stack = alloc::vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut comp = 0.0;
    let width = b - a;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (s1, s2) = est(lo, hi, &mut f);
        let local_tol = tol * (hi - lo) / width;
        if (s1 - s2).abs() <= local_tol.max(1e-15 * s2.abs()) || depth >= 40 {
            if depth >= 40 && (s1 - s2).abs() > 1e3 * local_tol {
                return Err(Error::QuadratureFailure);
            }
            // Kahan summation keeps the many-panel total honest.
            let y = s2 - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}

/// Integral over `[a, ∞)` by the map x = a + L u/(1−u) and adaptive panels in u.
pub fn adaptive_half_line<F: FnMut(f64) -> f64>(mut f: F, a: f64, scale: f64, tol: f64) -> Result<f64> {
    adaptive(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let v = 1.0 - u;
            let x = a + scale * u / v;
            let jac = scale / (v * v);
            let y = f(x) * jac;
            if y.is_finite() {
                y
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Chebyshev–Gauss nodes θ_k = (2k+1)π/(2n) on (0, π), equal weights π/n.
pub fn chebyshev_angles(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (2.0 * k as f64 + 1.0) * PI / (2.0 * n as f64))
        .collect()
}

/// Pairwise sum with a fixed reduction tree, so the result does not depend on
/// how the terms were produced.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => {
            let h = n / 2;
            pairwise_sum(&v[..h]) + pairwise_sum(&v[h..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_node() {
        let r = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(r.nodes, alloc::vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exactness_degree() {
        let r = gauss_legendre(5, 0.0, 1.0).unwrap();
        assert!((r.integrate(|x| x.powi(4)) - 0.2).abs() < 1e-14);
        assert!((r.integrate(|x| x.powi(9)) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn exponential_on_long_interval() {
        let r = gauss_legendre(40, 0.0, 10.0).unwrap();
        let exact = 1.0 - (-10.0f64).exp();
        assert!((r.integrate(|x| (-x).exp()) - exact).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_and_order() {
        for n in [2, 7, 32, 80, 161] {
            let r = gauss_legendre(n, -3.0, 4.0).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 7.0).abs() < 1e-13, "n={n}: {s}");
            assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn bad_interval() {
        assert_eq!(gauss_legendre(3, 1.0, 1.0), Err(Error::InvalidInterval(1.0, 1.0)));
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn adaptive_peaked() {
        let v = adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-11).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
        let g = adaptive_half_line(|x| (-x * x / 2.0).exp(), 0.0, 2.0, 1e-13).unwrap();
        assert!((g - (PI / 2.0).sqrt()).abs() < 1e-12);
    }
}
