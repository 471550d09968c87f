//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [potential]
//! kind = "polynomial"          # or "gaussian" (the default)
//! coeffs = [0, 0, 0, 0, 0.25]  # ascending
//!
//! [model]
//! n = 400
//! spikes = [2.0]               # or a [model.regime] table
//!
//! [model.regime]
//! kind = "supercritical-clustered"
//! a = 2.0
//! alphas = [0.5, -0.5]
//!
//! [run]
//! trials = 5000
//! seed = 7
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use spiked_core::potential::Potential;

use crate::regime::SpikeSpec;
use crate::{Error, Result};

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub model: ModelSpec,
    pub law: Option<LawSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub phase: PhaseSpec,
    pub verify: Option<VerifySpec>,
    pub transition: Option<TransitionSpec>,
    #[serde(default)]
    pub compare: CompareSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default = "default_kind")]
    pub kind: String,
    pub coeffs: Option<Vec<f64>>,
    pub convex_beyond_edge: Option<bool>,
}

fn default_kind() -> String {
    "gaussian".into()
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec { kind: default_kind(), coeffs: None, convex_beyond_edge: None }
    }
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        let p = match self.kind.as_str() {
            "gaussian" => {
                if self.coeffs.is_some() {
                    return Err(config_err("potential: the gaussian kind takes no coeffs"));
                }
                Potential::gaussian()
            }
            "polynomial" => {
                let c = self.coeffs.as_ref().ok_or_else(|| config_err("potential: polynomial needs coeffs"))?;
                Potential::polynomial(c).map_err(|e| config_err(format!("potential: {e}")))?
            }
            other => return Err(config_err(format!("potential: unknown kind {other:?}"))),
        };
        Ok(match self.convex_beyond_edge {
            Some(h) => p.with_convex_hint(Some(h)),
            None => p,
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n: Option<usize>,
    pub spikes: Option<Vec<f64>>,
    pub regime: Option<RegimeSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeSpec {
    pub kind: String,
    pub spikes: Option<Vec<f64>>,
    pub a: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub m: Option<usize>,
}

impl ModelSpec {
    pub fn n(&self) -> Result<usize> {
        match self.n {
            Some(n) if n > 0 => Ok(n),
            Some(_) => Err(config_err("model.n must be positive")),
            None => Err(config_err("model.n is required")),
        }
    }

    pub fn spike_spec(&self) -> Result<SpikeSpec> {
        match (&self.spikes, &self.regime) {
            (Some(_), Some(_)) => Err(config_err("model: give either spikes or a regime, not both")),
            (Some(s), None) => Ok(SpikeSpec::Explicit(s.clone())),
            (None, None) => Ok(SpikeSpec::Explicit(Vec::new())),
            (None, Some(r)) => r.to_spec(),
        }
    }
}

impl RegimeSpec {
    fn need<T: Clone>(&self, v: &Option<T>, field: &str) -> Result<T> {
        v.clone()
            .ok_or_else(|| config_err(format!("regime {:?} needs {field}", self.kind)))
    }

    fn unused<T>(&self, v: &Option<T>, field: &str) -> Result<()> {
        if v.is_some() {
            return Err(config_err(format!("regime {:?} does not take {field}", self.kind)));
        }
        Ok(())
    }

    pub fn to_spec(&self) -> Result<SpikeSpec> {
        let spec = match self.kind.as_str() {
            "subcritical" | "supercritical-separated" => {
                self.unused(&self.a, "a")?;
                self.unused(&self.alphas, "alphas")?;
                self.unused(&self.m, "m")?;
                let s = self.need(&self.spikes, "spikes")?;
                if self.kind == "subcritical" {
                    SpikeSpec::Subcritical(s)
                } else {
                    SpikeSpec::SupercriticalSeparated(s)
                }
            }
            "supercritical-clustered" => {
                self.unused(&self.spikes, "spikes")?;
                self.unused(&self.m, "m")?;
                SpikeSpec::SupercriticalClustered { a: self.need(&self.a, "a")?, alphas: self.need(&self.alphas, "alphas")? }
            }
            "secondary-critical" => {
                self.unused(&self.spikes, "spikes")?;
                SpikeSpec::SecondaryCritical { a: self.a, alphas: self.need(&self.alphas, "alphas")?, m: self.need(&self.m, "m")? }
            }
            "critical-continuous" => {
                self.unused(&self.spikes, "spikes")?;
                self.unused(&self.a, "a")?;
                self.unused(&self.m, "m")?;
                SpikeSpec::CriticalContinuous { alphas: self.need(&self.alphas, "alphas")? }
            }
            "critical-jump" => {
                self.unused(&self.spikes, "spikes")?;
                self.unused(&self.a, "a")?;
                SpikeSpec::CriticalJump { alphas: self.need(&self.alphas, "alphas")?, m: self.need(&self.m, "m")? }
            }
            other => return Err(config_err(format!("unknown regime {other:?}"))),
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    /// Any of tw, tw_j, f1, fk, gk, gk_j, normal.
    pub names: Vec<String>,
    #[serde(default = "one")]
    pub j: usize,
    /// Size of the GUE block when `alphas` is empty.
    pub k: Option<usize>,
    #[serde(default)]
    pub alphas: Vec<f64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "grid_lo")]
    pub lo: f64,
    #[serde(default = "grid_hi")]
    pub hi: f64,
    pub step: Option<f64>,
    pub points: Option<usize>,
}

fn grid_lo() -> f64 {
    -6.0
}

fn grid_hi() -> f64 {
    4.0
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { lo: grid_lo(), hi: grid_hi(), step: None, points: None }
    }
}

impl GridSpec {
    /// The grid points; `step` must divide hi − lo.
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(config_err("grid: need finite lo < hi"));
        }
        let count = match (self.step, self.points) {
            (Some(_), Some(_)) => return Err(config_err("grid: give step or points, not both")),
            (Some(h), None) => {
                if !(h > 0.0) {
                    return Err(config_err("grid: step must be positive"));
                }
                let k = (self.hi - self.lo) / h;
                if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
                    return Err(config_err("grid: step must divide hi - lo"));
                }
                k.round() as usize + 1
            }
            (None, Some(p)) => p,
            (None, None) => 101,
        };
        if count < 2 || count > 1_000_000 {
            return Err(config_err("grid: between 2 and 1e6 points"));
        }
        Ok(spiked_core::laws::uniform_grid(self.lo, self.hi, count))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// MCMC sweeps per chain.
    #[serde(default = "steps")]
    pub steps: usize,
    /// exact | mcmc | auto (exact for the Gaussian potential).
    #[serde(default = "auto")]
    pub method: String,
}

fn trials() -> usize {
    1000
}

fn steps() -> usize {
    4000
}

fn auto() -> String {
    "auto".into()
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec { trials: trials(), seed: 0, steps: steps(), method: auto() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "out_dir")]
    pub dir: PathBuf,
    /// JSON report; printed to stdout when absent.
    pub report: Option<PathBuf>,
    /// Binary sample file written by `sample`.
    pub samples: Option<PathBuf>,
    /// Also export samples as CSV.
    #[serde(default)]
    pub csv: bool,
}

fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: out_dir(), report: None, samples: None, csv: false }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    /// Upper end of the secondary-critical scan.
    #[serde(default = "a_max")]
    pub a_max: f64,
    #[serde(default = "scan")]
    pub scan_points: usize,
    /// Spikes for the x₀ table; defaults to ten points in (a_c, a_max].
    pub x0_at: Option<Vec<f64>>,
}

fn a_max() -> f64 {
    5.0
}

fn scan() -> usize {
    200
}

impl Default for PhaseSpec {
    fn default() -> Self {
        PhaseSpec { a_max: a_max(), scan_points: scan(), x0_at: None }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Generating-function arguments as [re, im].
    pub s: Option<Vec<[f64; 2]>>,
    pub cases: Option<Vec<VerifyCase>>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCase {
    pub d: usize,
    /// Defaults to d.
    pub n: Option<f64>,
    pub spikes: Vec<f64>,
    /// Union of [lo, hi] pieces; `inf` is allowed.
    pub region: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    /// secondary | critical
    pub kind: String,
    pub m: usize,
    /// Strictly descending; 𝐦 is their number.
    pub alphas: Vec<f64>,
    /// Which secondary critical value (the nearest one is used).
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    /// Exit 1 when any KS distance exceeds this.
    pub ks_max: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
