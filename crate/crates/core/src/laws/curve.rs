//! Tabulated laws on a T grid, for plotting and for comparing samples.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{fk_jth, gk_jth_with, normal_cdf, tw_jth};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    /// F^{(j)}_TW
    TracyWidom,
    /// F^{(j)}_k(·; α)
    Deformed,
    /// G^{(j)}_k(·; α)
    Gue,
    /// G = Φ
    Normal,
}

impl LawKind {
    pub fn name(self) -> &'static str {
        match self {
            LawKind::TracyWidom => "tw",
            LawKind::Deformed => "deformed",
            LawKind::Gue => "gue",
            LawKind::Normal => "normal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tw" => Some(LawKind::TracyWidom),
            "deformed" => Some(LawKind::Deformed),
            "gue" => Some(LawKind::Gue),
            "normal" => Some(LawKind::Normal),
            _ => None,
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawCurve {
    pub law: LawKind,
    pub alphas: Vec<f64>,
    pub j: usize,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl LawCurve {
    /// Evaluates the j-th law (s = 1) at every grid point.
    pub fn evaluate(law: LawKind, alphas: &[f64], j: usize, grid: &[f64]) -> Result<Self> {
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("grid must be strictly increasing"));
        }
        let values = grid
            .iter()
            .map(|&t| point(law, alphas, j, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(LawCurve { law, alphas: alphas.to_vec(), j, t: grid.to_vec(), values })
    }

    /// Linear interpolation, clamped to the end values outside the grid.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.t.len();
        if n == 0 {
            return f64::NAN;
        }
        if x <= self.t[0] {
            return self.values[0];
        }
        if x >= self.t[n - 1] {
            return self.values[n - 1];
        }
        let k = self.t.partition_point(|&v| v <= x);
        let (x0, x1) = (self.t[k - 1], self.t[k]);
        let w = (x - x0) / (x1 - x0);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }

    pub fn label(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        let _ = write!(s, "{} j={}", self.law, self.j);
        if !self.alphas.is_empty() {
            let _ = write!(s, " alphas={:?}", self.alphas);
        }
        s
    }
}

pub fn point(law: LawKind, alphas: &[f64], j: usize, t: f64) -> Result<f64> {
    match law {
        LawKind::TracyWidom => tw_jth(t, j),
        LawKind::Deformed => fk_jth(t, j, alphas),
        LawKind::Gue => gk_jth_with(t, j, alphas),
        LawKind::Normal => {
            if j != 1 {
                return Err(Error::InvalidArgument("the normal law has j = 1 only"));
            }
            Ok(normal_cdf(t))
        }
    }
}

/// Uniform grid of `n` points on [lo, hi].
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
