//! Random-walk Metropolis on the unordered eigenvalues, with density
//! ∝ Δ(λ) det[e^{n a_k λ_j}; p_r(λ_j)] ∏ e^{−nV(λ_j)}. The zero eigenvalues
//! of A contribute the confluent polynomial rows p_r, r < n − 𝐦; any basis
//! of degree < n − 𝐦 only changes the normalisation, so Chebyshev
//! polynomials on the support keep the matrix well scaled. Without spikes
//! the determinant is Δ(λ) itself and the density is Δ(λ)² ∏ e^{−nV}.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use spiked_core::equilibrium::solve_equilibrium;
use spiked_core::linalg::{log_abs_det_r, RMatrix};
use spiked_core::potential::Potential;

use super::{stream_rng, Method, SampleBatch};
use crate::error::invalid;
use crate::{Error, Result};

pub const MAX_MCMC_N: usize = 60;
pub const CHAINS: usize = 4;
/// Potential scale reduction above which the run is rejected.
pub const RHAT_MAX: f64 = 1.1;
const ADAPT_EVERY: usize = 20;
const ACCEPT_LO: f64 = 0.25;
const ACCEPT_HI: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct McmcDiagnostics {
    /// Sweeps per chain, burn-in included.
    pub sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    /// Final proposal scale per chain.
    pub step: Vec<f64>,
    /// Post-burn-in acceptance rate per chain.
    pub acceptance: Vec<f64>,
    /// Gelman–Rubin statistic of the top eigenvalue over the chains.
    pub rhat: f64,
}

struct LogGas {
    n: usize,
    nf: f64,
    v: Potential,
    spikes: Vec<f64>,
    center: f64,
    half: f64,
}

impl LogGas {
    /// log|det[e^{n a_k λ_j − s_k}; T_r(u_j)]| + Σ s_k, s_k the row maximum.
    fn log_det(&self, lam: &[f64]) -> f64 {
        let (n, m) = (self.n, self.spikes.len());
        let mut mat = RMatrix::zeros(n, n);
        let mut shift = 0.0;
        for (k, &a) in self.spikes.iter().enumerate() {
            let top = lam.iter().map(|&l| self.nf * a * l).fold(f64::NEG_INFINITY, f64::max);
            shift += top;
            for (j, &l) in lam.iter().enumerate() {
                mat[(k, j)] = (self.nf * a * l - top).exp();
            }
        }
        for (j, &l) in lam.iter().enumerate() {
            let u = (l - self.center) / self.half;
            let (mut t0, mut t1) = (1.0, u);
            for r in 0..n - m {
                mat[(m + r, j)] = t0;
                let t2 = 2.0 * u * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
        }
        log_abs_det_r(&mat).0 + shift
    }

    fn has_spikes(&self) -> bool {
        !self.spikes.is_empty()
    }
}

struct Chain {
    /// Recorded states, each sorted descending.
    records: Vec<Vec<f64>>,
    /// Top eigenvalue after every post-burn-in sweep.
    trace: Vec<f64>,
    step: f64,
    acceptance: f64,
}

struct Plan {
    sweeps: usize,
    burn_in: usize,
    thinning: usize,
}

fn run_chain(gas: &LogGas, plan: &Plan, quota: usize, mut step: f64, rng: &mut ChaCha8Rng) -> Chain {
    let n = gas.n;
    let vandermonde_power = if gas.has_spikes() { 1.0 } else { 2.0 };
    let mut lam: Vec<f64> = (0..n)
        .map(|i| {
            let u = (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos();
            let z: f64 = StandardNormal.sample(rng);
            gas.center + 0.9 * gas.half * u + step * z
        })
        .collect();
    let mut log_det = if gas.has_spikes() { gas.log_det(&lam) } else { 0.0 };
    let mut records = Vec::with_capacity(quota);
    let mut trace = Vec::with_capacity(plan.sweeps - plan.burn_in);
    let (mut window_acc, mut post_acc) = (0usize, 0usize);
    let mut proposal = lam.clone();
    for sweep in 0..plan.sweeps {
        for i in 0..n {
            let z: f64 = StandardNormal.sample(rng);
            let old = lam[i];
            let new = old + step * z;
            let mut delta = -gas.nf * (gas.v.v(new) - gas.v.v(old));
            let mut rep = 0.0;
            for (j, &l) in lam.iter().enumerate() {
                if j != i {
                    rep += ((new - l).abs() / (old - l).abs()).ln();
                }
            }
            delta += vandermonde_power * rep;
            let mut new_log_det = log_det;
            if gas.has_spikes() {
                proposal.copy_from_slice(&lam);
                proposal[i] = new;
                new_log_det = gas.log_det(&proposal);
                delta += new_log_det - log_det;
            }
            let u: f64 = rng.random();
            if delta.is_finite() && (delta >= 0.0 || u.ln() < delta) {
                lam[i] = new;
                log_det = new_log_det;
                window_acc += 1;
                if sweep >= plan.burn_in {
                    post_acc += 1;
                }
            }
        }
        if sweep < plan.burn_in {
            if (sweep + 1) % ADAPT_EVERY == 0 {
                let rate = window_acc as f64 / (ADAPT_EVERY * n) as f64;
                if rate < ACCEPT_LO {
                    step *= 0.75;
                } else if rate > ACCEPT_HI {
                    step *= 1.3;
                }
                window_acc = 0;
            }
            continue;
        }
        let top = lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        trace.push(top);
        let k = sweep - plan.burn_in + 1;
        if k % plan.thinning == 0 && records.len() < quota {
            let mut s = lam.clone();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            records.push(s);
        }
    }
    let post = (plan.sweeps - plan.burn_in).max(1) * n;
    Chain { records, trace, step, acceptance: post_acc as f64 / post as f64 }
}

/// Gelman–Rubin potential scale reduction of equal-length traces.
fn rhat(traces: &[Vec<f64>]) -> f64 {
    let l = traces.iter().map(|t| t.len()).min().unwrap_or(0);
    if l < 2 {
        return f64::INFINITY;
    }
    let lf = l as f64;
    let means: Vec<f64> = traces.iter().map(|t| t[..l].iter().sum::<f64>() / lf).collect();
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    let b = lf * means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    let w = traces
        .iter()
        .zip(&means)
        .map(|(t, m)| t[..l].iter().map(|x| (x - m).powi(2)).sum::<f64>() / (lf - 1.0))
        .sum::<f64>()
        / traces.len() as f64;
    if !(w > 0.0) {
        return f64::INFINITY;
    }
    (((lf - 1.0) / lf * w + b / lf) / w).sqrt()
}

/// Metropolis samples of the spiked log-gas for a general potential.
///
/// Each of the [`CHAINS`] chains runs `steps` sweeps (one proposal per
/// coordinate). The first half is burn-in, during which the proposal scale is
/// tuned towards an acceptance rate in [0.25, 0.4]; it is frozen afterwards.
/// The recorded states are spread evenly over the second half, `trials` in
/// total, chain by chain.
pub fn sample_general_mcmc(
    potential: &Potential,
    n: usize,
    spikes: &[f64],
    trials: usize,
    steps: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if steps == 0 {
        return Err(Error::NonConvergence(f64::INFINITY));
    }
    if n < 2 || n > MAX_MCMC_N {
        return Err(invalid(format!("MCMC needs 2 ≤ n ≤ {MAX_MCMC_N}")));
    }
    if trials < CHAINS {
        return Err(invalid(format!("MCMC needs at least {CHAINS} trials")));
    }
    if spikes.len() > n || spikes.iter().any(|a| !a.is_finite() || *a == 0.0) {
        return Err(invalid("spikes must be finite, non-zero and at most n"));
    }
    let mut sorted = spikes.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("spikes must be distinct"));
    }
    let (lo, hi) = match solve_equilibrium(potential) {
        Ok(eq) => (eq.left_endpoint, eq.right_endpoint),
        Err(_) => (-2.0, 2.0),
    };
    let gas = LogGas {
        n,
        nf: n as f64,
        v: potential.clone(),
        spikes: spikes.to_vec(),
        center: 0.5 * (lo + hi),
        half: 0.5 * (hi - lo),
    };
    let burn_in = steps / 2;
    let post = steps - burn_in;
    let per_chain = trials.div_ceil(CHAINS);
    if post < per_chain {
        return Err(invalid("too few steps for the requested number of trials"));
    }
    let plan = Plan { sweeps: steps, burn_in, thinning: post / per_chain };
    let step0 = 2.0 * gas.half / n as f64;
    let chains: Vec<Chain> = (0..CHAINS)
        .into_par_iter()
        .map(|c| {
            let quota = trials / CHAINS + usize::from(c < trials % CHAINS);
            let mut rng = stream_rng(seed, c as u64);
            run_chain(&gas, &plan, quota, step0, &mut rng)
        })
        .collect();
    let traces: Vec<Vec<f64>> = chains.iter().map(|c| c.trace.clone()).collect();
    let r = rhat(&traces);
    if !(r <= RHAT_MAX) {
        return Err(Error::NonConvergence(r));
    }
    let diagnostics = McmcDiagnostics {
        sweeps: steps,
        burn_in,
        thinning: plan.thinning,
        step: chains.iter().map(|c| c.step).collect(),
        acceptance: chains.iter().map(|c| c.acceptance).collect(),
        rhat: r,
    };
    let eigenvalues: Vec<f64> = chains.iter().flat_map(|c| c.records.iter().flatten().copied()).collect();
    Ok(SampleBatch {
        n,
        spikes: spikes.to_vec(),
        seed,
        method: Method::Mcmc,
        thinning: plan.thinning as u64,
        eigenvalues,
        diagnostics: Some(diagnostics),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhat_of_identical_chains_is_below_one() {
        let t: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let r = rhat(&[t.clone(), t.clone(), t.clone(), t]);
        assert!(r <= 1.0);
    }

    #[test]
    fn rhat_flags_separated_chains() {
        let t: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let shifted: Vec<f64> = t.iter().map(|x| x + 5.0).collect();
        assert!(rhat(&[t.clone(), t, shifted.clone(), shifted]) > 2.0);
    }
}
