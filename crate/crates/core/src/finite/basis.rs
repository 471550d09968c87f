#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::potential::{Potential, PotentialKind};
use crate::quadrature::{adaptive, composite, QuadratureRule};
use crate::{Error, Result};

use super::Region;

pub const MAX_DEGREE: usize = 40;
pub const MAX_N: f64 = 50.0;

/// Weights below e^{−LEVEL} relative to their peak are dropped.
const LEVEL: f64 = 750.0;
const PANELS: usize = 200;
const NODES: usize = 20;
const ORTHO_TOL: f64 = 1e-7;

/// Orthonormal functions ψ_ℓ = p_ℓ e^{−nV/2} for the weight e^{−nV(x)} on ℝ,
/// through the three-term recurrence
/// x ψ_ℓ = b_ℓ ψ_{ℓ+1} + a_ℓ ψ_ℓ + b_{ℓ−1} ψ_{ℓ−1}.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    pub potential: Potential,
    pub n: f64,
    pub max_degree: usize,
    /// a_0..a_d
    pub alpha: Vec<f64>,
    /// b_0..b_d
    pub beta: Vec<f64>,
    /// leading coefficients γ_0..γ_d of p_ℓ
    pub leading: Vec<f64>,
    /// log ∫ e^{−nV}
    pub log_mu0: f64,
    /// max |∫ψ_iψ_j − δ_ij| on an independent grid
    pub gram_deviation: f64,
    pub closed_form: bool,
    window: (f64, f64),
}

/// Gaussian potentials use the scaled Hermite recurrence; everything else goes
/// through the discretized Stieltjes procedure.
pub fn build_basis(potential: &Potential, n: f64, d: usize) -> Result<OrthoBasis> {
    check_sizes(n, d)?;
    if potential.kind != PotentialKind::Gaussian {
        return build_basis_stieltjes(potential, n, d);
    }
    let alpha = alloc::vec![0.0; d + 1];
    let beta: Vec<f64> = (0..=d).map(|l| ((l + 1) as f64 / n).sqrt()).collect();
    let log_mu0 = 0.5 * (2.0 * core::f64::consts::PI / n).ln();
    finish(potential, n, d, alpha, beta, log_mu0, true)
}

/// Lanczos on the discrete measure Σ w_q e^{−nV(x_q)} δ_{x_q}, with full
/// reorthogonalization.
pub fn build_basis_stieltjes(potential: &Potential, n: f64, d: usize) -> Result<OrthoBasis> {
    check_sizes(n, d)?;
    let (lo, hi, _, gmin) = level_window(potential, n, 0.0, LEVEL);
    let rule = composite(&[lo, hi], PANELS, NODES)?;
    let q = rule.len();
    let w: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * (-(n * potential.v(x) - gmin)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::UnderflowRange);
    }
    let log_mu0 = total.ln() - gmin;
    let x = &rule.nodes;

    let mut us: Vec<Vec<f64>> = Vec::with_capacity(d + 2);
    us.push(w.iter().map(|v| (v / total).sqrt()).collect());
    let mut alpha = Vec::with_capacity(d + 1);
    let mut beta = Vec::with_capacity(d + 1);
    for l in 0..=d {
        let u = &us[l];
        let a: f64 = (0..q).map(|i| x[i] * u[i] * u[i]).sum();
        let mut r: Vec<f64> = (0..q).map(|i| (x[i] - a) * u[i]).collect();
        if l > 0 {
            let prev = &us[l - 1];
            let b = beta[l - 1];
            for i in 0..q {
                r[i] -= b * prev[i];
            }
        }
        // two passes of classical Gram–Schmidt against everything so far
        for _ in 0..2 {
            for v in &us {
                let c: f64 = (0..q).map(|i| r[i] * v[i]).sum();
                for i in 0..q {
                    r[i] -= c * v[i];
                }
            }
        }
        let b = r.iter().map(|t| t * t).sum::<f64>().sqrt();
        if !(b > 0.0) {
            return Err(Error::LossOfOrthogonality(1.0));
        }
        alpha.push(a);
        beta.push(b);
        us.push(r.into_iter().map(|t| t / b).collect());
    }
    finish(potential, n, d, alpha, beta, log_mu0, false)
}

fn check_sizes(n: f64, d: usize) -> Result<()> {
    if d > MAX_DEGREE {
        return Err(Error::InvalidArgument("degree above 40"));
    }
    if !(n > 0.0 && n <= MAX_N) {
        return Err(Error::InvalidArgument("n must lie in (0, 50]"));
    }
    Ok(())
}

fn finish(
    potential: &Potential,
    n: f64,
    d: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    log_mu0: f64,
    closed_form: bool,
) -> Result<OrthoBasis> {
    let (lo, hi, _, _) = level_window(potential, n, 0.0, LEVEL);
    let mut leading = Vec::with_capacity(d + 1);
    leading.push((-0.5 * log_mu0).exp());
    for l in 0..d {
        leading.push(leading[l] / beta[l]);
    }
    let mut basis = OrthoBasis {
        potential: potential.clone(),
        n,
        max_degree: d,
        alpha,
        beta,
        leading,
        log_mu0,
        gram_deviation: 0.0,
        closed_form,
        window: (lo, hi),
    };
    // a finer grid with a different node count than the one used to build
    let check = composite(&[lo, hi], PANELS * 3 / 2, NODES + 4)?;
    let mut gram = alloc::vec![0.0; (d + 1) * (d + 1)];
    for (&x, &w) in check.nodes.iter().zip(&check.weights) {
        let p = basis.psi_all(x, d + 1);
        for i in 0..=d {
            for j in 0..=i {
                gram[i * (d + 1) + j] += w * p[i] * p[j];
            }
        }
    }
    let mut dev: f64 = 0.0;
    for i in 0..=d {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[i * (d + 1) + j] - target).abs());
        }
    }
    basis.gram_deviation = dev;
    if !(dev <= ORTHO_TOL) {
        return Err(Error::LossOfOrthogonality(dev));
    }
    Ok(basis)
}

impl OrthoBasis {
    /// Interval outside which e^{−nV} is below e^{−750} of its peak.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// p̂_0..p̂_{count−1} with p̂_0 = 1, so that p_ℓ = p̂_ℓ e^{−log μ0 / 2}.
    pub fn poly_hat_all(&self, x: f64, count: usize) -> Vec<f64> {
        self.recur(x, 1.0, count)
    }

    /// ψ_0(x)..ψ_{count−1}(x).
    pub fn psi_all(&self, x: f64, count: usize) -> Vec<f64> {
        let f = (-0.5 * self.n * self.potential.v(x) - 0.5 * self.log_mu0).exp();
        if f == 0.0 {
            return alloc::vec![0.0; count];
        }
        self.recur(x, f, count)
    }

    pub fn psi(&self, l: usize, x: f64) -> f64 {
        self.psi_all(x, l + 1)[l]
    }

    fn recur(&self, x: f64, start: f64, count: usize) -> Vec<f64> {
        assert!(count <= self.max_degree + 2, "degree beyond the basis");
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(start);
        for l in 0..count - 1 {
            let mut next = (x - self.alpha[l]) * out[l];
            if l > 0 {
                next -= self.beta[l - 1] * out[l - 1];
            }
            out.push(next / self.beta[l]);
        }
        out
    }

    /// Window, saddle and log-peak of e^{n(ax − V(x))}.
    pub fn tilt_window(&self, a: f64) -> (f64, f64, f64, f64) {
        let (lo, hi, xs, gmin) = level_window(&self.potential, self.n, a, LEVEL);
        (lo, hi, xs, -gmin)
    }

    /// log of the scale c(a) with e^{n(ax − V/2) − c(a)} ψ_j = p̂_j e^{n(ax−V) − peak}.
    pub fn tilt_log_scale(&self, a: f64) -> f64 {
        self.tilt_window(a).3 - 0.5 * self.log_mu0
    }

    /// e^{n(ax − V(x)/2) − c}.
    pub fn tilt(&self, a: f64, log_scale: f64, x: f64) -> f64 {
        (self.n * (a * x - 0.5 * self.potential.v(x)) - log_scale).exp()
    }

    /// Composite rule on E clipped to a window covering the basis and the
    /// tilted weights of the given spikes.
    pub fn rule_on(&self, region: &Region, spikes: &[f64]) -> Result<QuadratureRule> {
        let (mut lo, mut hi) = self.window;
        for &a in spikes {
            let (l, h, _, _) = self.tilt_window(a);
            lo = lo.min(l);
            hi = hi.max(h);
        }
        let h = (hi - lo) / PANELS as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (p, q) in region.clip(lo, hi) {
            let panels = libm::ceil((q - p) / h).max(2.0) as usize;
            let r = composite(&[p, q], panels, NODES)?;
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        Ok(QuadratureRule { nodes, weights, a: lo, b: hi })
    }
}

/// Γ_j(a) = ∫ e^{n(ax − V/2)} ψ_j, by adaptive quadrature on either side of
/// the saddle of e^{n(ax − V)}.
pub fn gamma_j(basis: &OrthoBasis, j: usize, a: f64) -> Result<f64> {
    let (lo, hi, _, _) = basis.tilt_window(a);
    gamma_j_on(basis, j, a, lo, hi)
}

/// Γ_j(a) with the integral truncated to [lo, hi].
pub fn gamma_j_on(basis: &OrthoBasis, j: usize, a: f64, lo: f64, hi: f64) -> Result<f64> {
    let (g, c) = gamma_scaled_on(basis, j, a, lo, hi)?;
    Ok(g * c.exp())
}

/// Γ_j(a) e^{−c(a)} and c(a), see [`OrthoBasis::tilt_log_scale`].
pub(super) fn gamma_scaled(basis: &OrthoBasis, j: usize, a: f64) -> Result<(f64, f64)> {
    let (lo, hi, _, _) = basis.tilt_window(a);
    gamma_scaled_on(basis, j, a, lo, hi)
}

fn gamma_scaled_on(basis: &OrthoBasis, j: usize, a: f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if j > basis.max_degree {
        return Err(Error::InvalidArgument("degree beyond the basis"));
    }
    if !(lo < hi) {
        return Err(Error::InvalidInterval(lo, hi));
    }
    let (_, _, xs, peak) = basis.tilt_window(a);
    let n = basis.n;
    // The first j Taylor terms of e^{nax} are orthogonal to p_j; dropping
    // them removes most of the cancellation when Γ_j is small.
    let f = |x: f64| {
        let (tail, shift) = exp_tail(j, n * a * x);
        let e = shift - n * basis.potential.v(x) - peak;
        if e < -800.0 || tail == 0.0 {
            return 0.0;
        }
        basis.poly_hat_all(x, j + 1)[j] * tail * e.exp()
    };
    // scale for the absolute tolerance
    let coarse = composite(&[lo, hi], 64, NODES)?;
    let l1 = coarse.integrate(|x| f(x).abs());
    let tol = 1e-14 * l1.max(f64::MIN_POSITIVE);
    let total = if xs > lo && xs < hi {
        adaptive(f, lo, xs, tol * (xs - lo) / (hi - lo))? + adaptive(f, xs, hi, tol * (hi - xs) / (hi - lo))?
    } else {
        adaptive(f, lo, hi, tol)?
    };
    Ok((total, peak - 0.5 * basis.log_mu0))
}

/// Σ_{k≥j} y^k/k! written as `tail · e^{shift}`.
fn exp_tail(j: usize, y: f64) -> (f64, f64) {
    if j == 0 {
        return (1.0, y);
    }
    let jf = j as f64;
    if y >= 0.0 {
        // regularized incomplete gamma P(j, y) times e^y
        if y == 0.0 {
            return (0.0, 0.0);
        }
        let ly = y.ln();
        let mut lfact = 0.0;
        if y < jf {
            for k in 1..=j {
                lfact += (k as f64).ln();
            }
            let mut sum = 0.0;
            let mut k = j;
            loop {
                let term = (k as f64 * ly - lfact - y).exp();
                sum += term;
                if term < 1e-17 * sum {
                    break;
                }
                k += 1;
                lfact += (k as f64).ln();
            }
            (sum, y)
        } else {
            let mut lower = 0.0;
            for k in 0..j {
                if k > 0 {
                    lfact += (k as f64).ln();
                }
                lower += (k as f64 * ly - lfact - y).exp();
            }
            (1.0 - lower, y)
        }
    } else if -y <= jf {
        // alternating with decreasing terms
        let mut term = 1.0;
        for k in 1..=j {
            term *= y / k as f64;
        }
        let mut sum = 0.0;
        let mut k = j;
        while term.abs() > 1e-17 * sum.abs() || sum == 0.0 {
            sum += term;
            k += 1;
            term *= y / k as f64;
        }
        (sum, 0.0)
    } else {
        let mut term = 1.0;
        let mut lower = 1.0;
        for k in 1..j {
            term *= y / k as f64;
            lower += term;
        }
        (y.exp() - lower, 0.0)
    }
}

/// Interval where g(x) = n(V(x) − a x) lies within `level` of its minimum,
/// the minimizer, and the minimum value.
fn level_window(v: &Potential, n: f64, a: f64, level: f64) -> (f64, f64, f64, f64) {
    let g = |x: f64| n * (v.v(x) - a * x);
    // Cauchy bound on the roots of V′ − a: g is monotone beyond it
    let mut dv = v.dv_coeffs();
    dv[0] -= a;
    let lead = *dv.last().unwrap();
    let r = 1.0 + dv[..dv.len() - 1].iter().fold(0.0f64, |m, c| m.max((c / lead).abs())) + 1.0;
    const GRID: usize = 4000;
    let xs: Vec<f64> = (0..=GRID).map(|i| -r + 2.0 * r * i as f64 / GRID as f64).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let (mut imin, mut gmin) = (0, f64::INFINITY);
    for (i, &y) in gs.iter().enumerate() {
        if y < gmin {
            gmin = y;
            imin = i;
        }
    }
    // refine the minimizer by golden section on the neighbouring cells
    let (mut p, mut q) = (xs[imin.saturating_sub(1)], xs[(imin + 1).min(GRID)]);
    let phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    for _ in 0..80 {
        let c = q - phi * (q - p);
        let d = p + phi * (q - p);
        if g(c) < g(d) {
            q = d;
        } else {
            p = c;
        }
    }
    let xmin = 0.5 * (p + q);
    gmin = gmin.min(g(xmin));
    let inside = |x: f64| g(x) - gmin <= level;

    let first = gs.iter().position(|&y| y - gmin <= level).unwrap();
    let last = gs.iter().rposition(|&y| y - gmin <= level).unwrap();
    let edge = |from: f64, dir: f64, at_bound: bool| {
        // from is inside; walk outward to a point outside, then bisect
        let (mut a_in, mut a_out) = (from, from + dir * 2.0 * r / GRID as f64);
        if at_bound {
            let mut step = 1.0;
            a_out = from + dir * step;
            while inside(a_out) {
                a_in = a_out;
                step *= 2.0;
                a_out = from + dir * step;
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (a_in + a_out);
            if inside(mid) {
                a_in = mid;
            } else {
                a_out = mid;
            }
        }
        a_out
    };
    let lo = edge(xs[first], -1.0, first == 0);
    let hi = edge(xs[last], 1.0, last == GRID);
    (lo, hi, xmin, gmin)
}
