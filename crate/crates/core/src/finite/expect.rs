#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::gamma_scaled;
use super::{OrthoBasis, Region};
use crate::linalg::{cond_r, det_c, solve_c, sym_eigenvalues, to_complex, CMatrix, RMatrix};
use crate::quadrature::QuadratureRule;
use crate::sderiv;
use crate::{Error, Result};

pub const MIN_SPIKE_GAP: f64 = 1e-8;
pub const MAX_COND_B: f64 = 1e12;
/// |𝓔| below this counts as vanishing for the identity route.
const HYPOTHESIS_FLOOR: f64 = 1e-13;

/// [∫_E ψ_iψ_j] for i, j < d.
#[derive(Debug, Clone)]
pub struct GramRestriction {
    pub region: Region,
    pub matrix: RMatrix,
    pub nodes: usize,
    pub window: (f64, f64),
}

impl GramRestriction {
    pub fn new(basis: &OrthoBasis, d: usize, region: &Region) -> Result<Self> {
        check_dim(basis, d)?;
        let rule = basis.rule_on(region, &[])?;
        let psi = psi_samples(basis, &rule, d);
        Ok(GramRestriction {
            region: region.clone(),
            matrix: gram(&psi, &psi, &rule.weights),
            nodes: rule.len(),
            window: (rule.a, rule.b),
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.matrix)
    }
}

/// Data of the rank-𝐦 perturbation K̃_d = K_d + Σ_k ŵ_k ⊗ (B^{-1}t̂)_k.
///
/// Every function tied to a_k is carried with the factor e^{−c_k}
/// (`log_scales`); B, Γ and ŵ are stored scaled, and the kernel does not
/// depend on the choice.
#[derive(Debug, Clone)]
pub struct SpikedKernelData {
    pub d: usize,
    pub spikes: Vec<f64>,
    pub log_scales: Vec<f64>,
    /// B_{lk} = Γ_{d−𝐦+l}(a_k) e^{−c_k}
    pub b: RMatrix,
    pub b_inv: RMatrix,
    pub cond_b: f64,
    /// Γ_i(a_k) e^{−c_k}, i < d
    pub gamma: RMatrix,
    /// quadrature nodes on the basis window, with samples of
    /// t̂ = (ψ_{d−𝐦}, …, ψ_{d−1}) and ŵ_k = (1 − K_d) v̂_k
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub t_hat: RMatrix,
    pub w_hat: RMatrix,
}

impl SpikedKernelData {
    /// B with the scales removed.
    pub fn b_unscaled(&self) -> RMatrix {
        let mut b = self.b.clone();
        for (k, &c) in self.log_scales.iter().enumerate() {
            let f = c.exp();
            b.column_mut(k).scale_mut(f);
        }
        b
    }

    /// K̃_d(x, y).
    pub fn kernel(&self, basis: &OrthoBasis, x: f64, y: f64) -> f64 {
        let d = self.d;
        let m = self.spikes.len();
        let px = basis.psi_all(x, d);
        let py = basis.psi_all(y, d);
        let mut k: f64 = (0..d).map(|i| px[i] * py[i]).sum();
        for kk in 0..m {
            let mut w = basis.tilt(self.spikes[kk], self.log_scales[kk], x);
            for i in 0..d {
                w -= self.gamma[(i, kk)] * px[i];
            }
            let t: f64 = (0..m).map(|l| self.b_inv[(kk, l)] * py[d - m + l]).sum();
            k += w * t;
        }
        k
    }
}

fn check_dim(basis: &OrthoBasis, d: usize) -> Result<()> {
    if d > basis.max_degree {
        return Err(Error::InvalidArgument("dimension exceeds the basis degree"));
    }
    Ok(())
}

fn check_spikes(spikes: &[f64], d: usize) -> Result<()> {
    if spikes.len() > d {
        return Err(Error::InvalidArgument("more spikes than the dimension"));
    }
    for (i, &a) in spikes.iter().enumerate() {
        if !a.is_finite() || a == 0.0 {
            return Err(Error::InvalidArgument("spikes must be finite and nonzero"));
        }
        for &b in &spikes[..i] {
            let gap = (a - b).abs();
            if gap < MIN_SPIKE_GAP {
                return Err(Error::ConfluentAlphas(gap));
            }
        }
    }
    Ok(())
}

/// ψ_0..ψ_{count−1} at the rule nodes, one row per function.
fn psi_samples(basis: &OrthoBasis, rule: &QuadratureRule, count: usize) -> RMatrix {
    let mut m = DMatrix::zeros(count, rule.len());
    for (q, &x) in rule.nodes.iter().enumerate() {
        for (i, v) in basis.psi_all(x, count).into_iter().enumerate() {
            m[(i, q)] = v;
        }
    }
    m
}

fn tilt_samples(basis: &OrthoBasis, rule: &QuadratureRule, spikes: &[f64], scales: &[f64]) -> RMatrix {
    DMatrix::from_fn(spikes.len(), rule.len(), |k, q| basis.tilt(spikes[k], scales[k], rule.nodes[q]))
}

/// [Σ_q w_q f_i(x_q) g_j(x_q)]
fn gram(f: &RMatrix, g: &RMatrix, w: &[f64]) -> RMatrix {
    let mut fw = f.clone();
    for (q, &wq) in w.iter().enumerate() {
        fw.column_mut(q).scale_mut(wq);
    }
    fw * g.transpose()
}

fn identity_minus(s: Complex64, m: &RMatrix) -> CMatrix {
    let mut a = to_complex(m) * (-s);
    for i in 0..m.nrows() {
        a[(i, i)] += 1.0;
    }
    a
}

/// det(I_d − s[∫_E ψ_iψ_j]_{i,j<d}).
pub fn expectation_null(basis: &OrthoBasis, d: usize, region: &Region, s: Complex64) -> Result<Complex64> {
    let g = GramRestriction::new(basis, d, region)?;
    Ok(det_c(&identity_minus(s, &g.matrix)))
}

/// One spike at dimension d, through
/// 𝓔_{d−1}·[1 − s⟨ψ̃, χψ_{d−1}⟩ − s²⟨(1 − sχK_{d−1}χ)^{-1}χK_{d−1}χψ̃, χψ_{d−1}⟩]
/// with ψ̃ = (1 − K_{d−1})v̂ / Γ_{d−1}(a).
pub fn expectation_rank_one(basis: &OrthoBasis, d: usize, a: f64, region: &Region, s: Complex64) -> Result<Complex64> {
    check_dim(basis, d)?;
    if d == 0 {
        return Err(Error::InvalidArgument("rank one needs d ≥ 1"));
    }
    check_spikes(&[a], d)?;
    let (gam, c) = gamma_scaled_all(basis, d, a)?;
    if gam[d - 1] == 0.0 {
        return Err(Error::SingularGammaMatrix);
    }
    let rule = basis.rule_on(region, &[a])?;
    let psi = psi_samples(basis, &rule, d);
    let v = tilt_samples(basis, &rule, &[a], &[c]);
    // ψ̃ at the nodes
    let mut tilde = v.rows(0, 1).clone_owned();
    for i in 0..d - 1 {
        tilde -= psi.rows(i, 1) * gam[i];
    }
    tilde /= gam[d - 1];

    let head = psi.rows(0, d - 1).clone_owned();
    let last = psi.rows(d - 1, 1).clone_owned();
    let w = &rule.weights;
    let g = gram(&head, &head, w);
    let u = gram(&head, &tilde, w);
    let h = gram(&head, &last, w);
    let cc = gram(&tilde, &last, w)[(0, 0)];

    let op = identity_minus(s, &g);
    let base = det_c(&op);
    let rhs: DVector<Complex64> = u.column(0).map(|x| Complex64::new(x, 0.0));
    let corr = if d > 1 {
        let y = solve_c(&op, &rhs)?;
        (0..d - 1).map(|i| y[i] * h[(i, 0)]).sum::<Complex64>()
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(base * (1.0 - s * cc - s * s * corr))
}

fn gamma_scaled_all(basis: &OrthoBasis, d: usize, a: f64) -> Result<(Vec<f64>, f64)> {
    let mut out = Vec::with_capacity(d);
    let mut c = 0.0;
    for j in 0..d {
        let (g, cj) = gamma_scaled(basis, j, a)?;
        out.push(g);
        c = cj;
    }
    if d == 0 {
        c = basis.tilt_log_scale(a);
    }
    Ok((out, c))
}

/// B, Γ and the samples of t̂ and ŵ; all integrals over ℝ come from one
/// composite rule, independent of [`gamma_j`](super::gamma_j).
pub fn spiked_kernel_data(basis: &OrthoBasis, d: usize, spikes: &[f64]) -> Result<SpikedKernelData> {
    check_dim(basis, d)?;
    check_spikes(spikes, d)?;
    let m = spikes.len();
    let scales: Vec<f64> = spikes.iter().map(|&a| basis.tilt_log_scale(a)).collect();
    let rule = basis.rule_on(&Region::whole(), spikes)?;
    let psi = psi_samples(basis, &rule, d);
    let v = tilt_samples(basis, &rule, spikes, &scales);
    let gamma = gram(&psi, &v, &rule.weights);
    let b = gamma.rows(d - m, m).clone_owned();
    let cond_b = if m == 0 { 1.0 } else { cond_r(&b) };
    if !(cond_b <= MAX_COND_B) {
        return Err(Error::IllConditionedB(cond_b));
    }
    let b_inv = b.clone().try_inverse().ok_or(Error::IllConditionedB(f64::INFINITY))?;
    let t_hat = psi.rows(d - m, m).clone_owned();
    let w_hat = &v - gamma.transpose() * &psi;
    Ok(SpikedKernelData {
        d,
        spikes: spikes.to_vec(),
        log_scales: scales,
        b,
        b_inv,
        cond_b,
        gamma,
        nodes: rule.nodes,
        weights: rule.weights,
        t_hat,
        w_hat,
    })
}

/// det(I − s[∫_E η_iφ_j]) for the biorthogonal pair η_i = ψ_i (i < d) and
/// φ_i = ψ_i (i < d − 𝐦), φ_{d−𝐦+j} = Σ_k ŵ′_k (B^{-1})_{kj} with
/// ŵ′_k = v̂_k − Σ_{i<d−𝐦} Γ_i(a_k)ψ_i.
pub fn expectation_rank_m_direct(
    basis: &OrthoBasis,
    d: usize,
    spikes: &[f64],
    region: &Region,
    s: Complex64,
) -> Result<Complex64> {
    if spikes.is_empty() {
        return expectation_null(basis, d, region, s);
    }
    let data = spiked_kernel_data(basis, d, spikes)?;
    direct_from_data(basis, &data, region, s)
}

fn direct_from_data(basis: &OrthoBasis, data: &SpikedKernelData, region: &Region, s: Complex64) -> Result<Complex64> {
    let d = data.d;
    let m = data.spikes.len();
    let r = d - m;
    let rule = basis.rule_on(region, &data.spikes)?;
    let psi = psi_samples(basis, &rule, d);
    let v = tilt_samples(basis, &rule, &data.spikes, &data.log_scales);
    let g = gram(&psi, &psi, &rule.weights);
    let h = gram(&psi, &v, &rule.weights);
    // ∫_E ψ_i ŵ′_k
    let w = h - g.columns(0, r) * data.gamma.rows(0, r);
    let tail = w * &data.b_inv;
    let mut mat = g;
    mat.columns_mut(r, m).copy_from(&tail);
    Ok(det_c(&identity_minus(s, &mat)))
}

/// 𝓔_d(E; s) · det[Γ_{d−j}(a_k) Ē_{d−j+1}(a_k)] / det[Γ_{d−j}(a_k)], where
/// Ē_{d′}(a) is the rank-one expectation at dimension d′ divided by the null
/// one.
pub fn expectation_rank_m_identity(
    basis: &OrthoBasis,
    d: usize,
    spikes: &[f64],
    region: &Region,
    s: Complex64,
) -> Result<Complex64> {
    check_dim(basis, d)?;
    check_spikes(spikes, d)?;
    let m = spikes.len();
    let null_d = expectation_null(basis, d, region, s)?;
    if m == 0 {
        return Ok(null_d);
    }
    let mut nulls = Vec::with_capacity(m);
    for j in 1..=m {
        let dim = d - j + 1;
        let e = if j == 1 { null_d } else { expectation_null(basis, dim, region, s)? };
        if e.norm() < HYPOTHESIS_FLOOR {
            return Err(Error::HypothesisViolated(dim));
        }
        nulls.push(e);
    }
    let mut num = CMatrix::zeros(m, m);
    let mut den = RMatrix::zeros(m, m);
    for (k, &a) in spikes.iter().enumerate() {
        for j in 1..=m {
            let dim = d - j + 1;
            let (g, _) = gamma_scaled(basis, d - j, a)?;
            let ratio = expectation_rank_one(basis, dim, a, region, s)? / nulls[j - 1];
            den[(j - 1, k)] = g;
            num[(j - 1, k)] = ratio * g;
        }
    }
    let det_den = crate::linalg::det_r(&den);
    let size: f64 = (0..m).map(|k| den.column(k).norm()).product();
    if !(det_den.abs() > 1e-13 * size) {
        return Err(Error::SingularGammaMatrix);
    }
    Ok(null_d * det_c(&num) / det_den)
}

/// Probability of at most j − 1 eigenvalues in E, from the Taylor data in s
/// of the direct route at s = 1.
pub fn gap_prob(basis: &OrthoBasis, d: usize, spikes: &[f64], region: &Region, j: usize) -> Result<f64> {
    if j == 0 || j > 4 {
        return Err(Error::InvalidArgument("j must lie in 1..=4"));
    }
    if spikes.is_empty() {
        return sderiv::jth(|s| expectation_null(basis, d, region, s), j);
    }
    let data = spiked_kernel_data(basis, d, spikes)?;
    sderiv::jth(|s| direct_from_data(basis, &data, region, s), j)
}
