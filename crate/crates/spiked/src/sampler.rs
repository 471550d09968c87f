//! Eigenvalue samples of the spiked model: exact for V = x²/2 (M = A + GUE),
//! Metropolis on the eigenvalue log-gas for general V. Plus the rescalings at
//! the edge and at outliers, and the Kolmogorov distance to a limit law.

mod format;
mod lapack;
mod mcmc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use spiked_core::Complex64;

use crate::error::invalid;
use crate::{Error, Result};
use lapack::HermitianSolver;

pub use format::{read_batch, read_batch_from, write_batch, write_batch_to, write_csv, FORMAT_VERSION};
pub use lapack::TWO_STAGE_MIN;
pub use mcmc::{sample_general_mcmc, McmcDiagnostics, CHAINS, RHAT_MAX};

pub const MAX_N: usize = 2000;
pub const MAX_TRIALS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Mcmc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Mcmc => "mcmc",
        }
    }
}

/// Eigenvalues of `trials` independent draws, each sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub n: usize,
    pub spikes: Vec<f64>,
    pub seed: u64,
    pub method: Method,
    /// Sweeps between recorded MCMC states; 0 for exact samples.
    pub thinning: u64,
    /// Row-major, `trials × n`.
    pub eigenvalues: Vec<f64>,
    pub diagnostics: Option<McmcDiagnostics>,
}

impl SampleBatch {
    pub fn trials(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.eigenvalues.len() / self.n
        }
    }

    pub fn trial(&self, t: usize) -> &[f64] {
        &self.eigenvalues[t * self.n..(t + 1) * self.n]
    }

    /// The k-th largest eigenvalue (k ≥ 1) of every trial.
    pub fn kth_largest(&self, k: usize) -> Vec<f64> {
        (0..self.trials()).map(|t| self.trial(t)[k - 1]).collect()
    }

    /// All eigenvalues of all trials, for spectral statistics.
    pub fn pooled(&self) -> &[f64] {
        &self.eigenvalues
    }
}

/// The RNG of one trial (or chain): the seed picks the key, the index picks
/// the stream, so results do not depend on scheduling.
pub(crate) fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fills the upper triangle of A + G in column-major order, with A =
/// diag(`source`) and G of density ∝ exp(−(n/2) Tr G²).
fn fill_matrix(a: &mut [Complex64], n: usize, source: &[f64], rng: &mut ChaCha8Rng) {
    let sd_diag = (1.0 / n as f64).sqrt();
    let sd_off = (0.5 / n as f64).sqrt();
    for j in 0..n {
        for i in 0..j {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            a[i + j * n] = Complex64::new(sd_off * re, sd_off * im);
        }
        let z: f64 = StandardNormal.sample(rng);
        a[j + j * n] = Complex64::new(source[j] + sd_diag * z, 0.0);
    }
}

/// Exact samples of the Gaussian model: the eigenvalues of A + G with
/// A = diag(a_1, …, a_𝐦, 0, …, 0).
pub fn sample_gaussian_spiked(n: usize, spikes: &[f64], trials: usize, seed: u64) -> Result<SampleBatch> {
    if spikes.len() > n {
        return Err(invalid("more spikes than the dimension"));
    }
    let mut source = spikes.to_vec();
    source.resize(n, 0.0);
    let mut batch = sample_gaussian_source(n, &source, trials, seed)?;
    batch.spikes = spikes.to_vec();
    Ok(batch)
}

/// As [`sample_gaussian_spiked`], with the full diagonal of A given, in any
/// order. The law only depends on the eigenvalues of A.
pub fn sample_gaussian_source(n: usize, source: &[f64], trials: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 || n > MAX_N {
        return Err(invalid(format!("n must lie in 1..={MAX_N}")));
    }
    if trials == 0 || trials > MAX_TRIALS {
        return Err(invalid(format!("trials must lie in 1..={MAX_TRIALS}")));
    }
    if source.len() != n {
        return Err(invalid("the diagonal of A must have length n"));
    }
    if source.iter().any(|a| !a.is_finite()) {
        return Err(invalid("non-finite entry of A"));
    }
    HermitianSolver::new(n)?;
    let rows: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map_init(
            || (HermitianSolver::new(n).ok(), vec![Complex64::new(0.0, 0.0); n * n]),
            |(solver, buf), t| {
                let solver = solver.as_mut().ok_or(Error::Lapack(-1))?;
                let mut rng = stream_rng(seed, t as u64);
                fill_matrix(buf, n, source, &mut rng);
                let w = solver.eigenvalues(buf)?;
                Ok(w.iter().rev().copied().collect())
            },
        )
        .collect::<Result<_>>()?;
    let spikes = source.iter().copied().filter(|&a| a != 0.0).collect();
    Ok(SampleBatch {
        n,
        spikes,
        seed,
        method: Method::Exact,
        thinning: 0,
        eigenvalues: rows.concat(),
        diagnostics: None,
    })
}

/// How the k-th eigenvalue is centred and scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Centering {
    /// (ξ − e)·β·n^{2/3}
    Edge { e: f64, beta: f64 },
    /// (ξ − x*)·√(−G″·n)
    Outlier { x_star: f64, g2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaledStatistic {
    pub k: usize,
    pub centering: Centering,
    pub values: Vec<f64>,
}

impl Centering {
    /// (centre, scale) at dimension n.
    pub fn affine(&self, n: usize) -> Result<(f64, f64)> {
        let nf = n as f64;
        let (c, s) = match *self {
            Centering::Edge { e, beta } => {
                if !(beta > 0.0) {
                    return Err(invalid("edge constant must be positive"));
                }
                (e, beta * nf.powf(2.0 / 3.0))
            }
            Centering::Outlier { x_star, g2 } => {
                if !(g2 < 0.0) {
                    return Err(Error::BadScale(g2));
                }
                (x_star, (-g2 * nf).sqrt())
            }
        };
        if !(c.is_finite() && s.is_finite() && s > 0.0) {
            return Err(invalid("non-finite centring"));
        }
        Ok((c, s))
    }
}

/// Rescales the k-th largest eigenvalue (k ≥ 1) of every trial.
pub fn rescale(batch: &SampleBatch, k: usize, mode: Centering) -> Result<RescaledStatistic> {
    if k == 0 || k > batch.n {
        return Err(invalid("k must lie in 1..=n"));
    }
    let (c, s) = mode.affine(batch.n)?;
    let values = batch.kth_largest(k).into_iter().map(|x| (x - c) * s).collect();
    Ok(RescaledStatistic { k, centering: mode, values })
}

/// sup |F_emp − F| over the sample points, both one-sided limits included.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(invalid("empty sample"));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(invalid("NaN in sample"));
    }
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let len = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / len).max((i + 1) as f64 / len - f);
    }
    Ok(d)
}
