//! Brute-force tensor quadrature of E[∏(1 − s χ_E(λ_j))] over the unordered
//! eigenvalue density Δ(λ) det[e^{n a_k λ_j}; λ_j^r] ∏ e^{−nV(λ_j)}, for
//! desk-scale d. Slices over the first coordinate run in parallel and are
//! reduced with a fixed pairwise tree, so the result does not depend on the
//! thread count.

use rayon::prelude::*;
use spiked_core::finite::Region;
use spiked_core::linalg::{vandermonde, RMatrix};
use spiked_core::potential::Potential;
use spiked_core::quadrature::{gauss_legendre, pairwise_sum};
use spiked_core::Complex64;

use crate::error::invalid;
use crate::Result;

pub const MAX_ORACLE_D: usize = 3;
const NODES: usize = 60;
/// Weights below e^{−41} ≈ 1e−18 of their peak are dropped.
const CUT: f64 = 18.0 * std::f64::consts::LN_10;

fn window(v: &Potential, n: f64, spikes: &[f64]) -> (f64, f64, f64) {
    let grid: Vec<f64> = (0..=60000).map(|i| -30.0 + 1e-3 * i as f64).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in std::iter::once(0.0).chain(spikes.iter().copied()) {
        let g: Vec<f64> = grid.iter().map(|&x| n * (v.v(x) - a * x)).collect();
        let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
        for (x, y) in grid.iter().zip(&g) {
            if y - gmin <= CUT {
                lo = lo.min(*x);
                hi = hi.max(*x);
            }
        }
    }
    let vref = grid.iter().map(|&x| v.v(x)).fold(f64::INFINITY, f64::min);
    (lo, hi, vref)
}

pub fn tensor_expectation(v: &Potential, n: f64, d: usize, spikes: &[f64], region: &Region, s: Complex64) -> Result<Complex64> {
    let m = spikes.len();
    if d == 0 || d > MAX_ORACLE_D {
        return Err(invalid(format!("the oracle handles 1 ≤ d ≤ {MAX_ORACLE_D}")));
    }
    if m > d {
        return Err(invalid("more spikes than the dimension"));
    }
    let (lo, hi, vref) = window(v, n, spikes);
    let mut breaks = vec![lo, hi];
    breaks.extend(region.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (mut xs, mut ws, mut fs) = (vec![], vec![], vec![]);
    for p in breaks.windows(2) {
        let inside = region.contains(0.5 * (p[0] + p[1]));
        let rule = gauss_legendre(NODES, p[0], p[1])?;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(*x);
            ws.push(w * (-n * (v.v(*x) - vref)).exp());
            fs.push(if inside { Complex64::new(1.0, 0.0) - s } else { Complex64::new(1.0, 0.0) });
        }
    }
    let q = xs.len();
    let density = |idx: &[usize]| -> f64 {
        let lam: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let mut mat = RMatrix::zeros(d, d);
        let mut shift = 0.0;
        for (k, &a) in spikes.iter().enumerate() {
            let top = lam.iter().map(|&l| n * a * l).fold(f64::NEG_INFINITY, f64::max);
            shift += top;
            for j in 0..d {
                mat[(k, j)] = (n * a * lam[j] - top).exp();
            }
        }
        for r in 0..d - m {
            for j in 0..d {
                mat[(m + r, j)] = lam[j].powi(r as i32);
            }
        }
        let w: f64 = idx.iter().map(|&i| ws[i]).product();
        vandermonde(&lam) * mat.lu().determinant() * shift.exp() * w
    };
    let slices: Vec<(f64, f64, f64)> = (0..q)
        .into_par_iter()
        .map(|i0| {
            let (mut re, mut im, mut den) = (0.0, 0.0, 0.0);
            let mut idx = vec![0usize; d];
            for flat in 0..q.pow(d as u32 - 1) {
                idx[0] = i0;
                let mut r = flat;
                for slot in idx.iter_mut().skip(1) {
                    *slot = r % q;
                    r /= q;
                }
                let p = density(&idx);
                let f: Complex64 = idx.iter().map(|&i| fs[i]).product();
                re += p * f.re;
                im += p * f.im;
                den += p;
            }
            (re, im, den)
        })
        .collect();
    let re: Vec<f64> = slices.iter().map(|t| t.0).collect();
    let im: Vec<f64> = slices.iter().map(|t| t.1).collect();
    let den: Vec<f64> = slices.iter().map(|t| t.2).collect();
    let den = pairwise_sum(&den);
    Ok(Complex64::new(pairwise_sum(&re) / den, pairwise_sum(&im) / den))
}
