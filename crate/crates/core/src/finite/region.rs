use alloc::vec::Vec;

use crate::{Error, Result};

/// A finite union of closed intervals; endpoints may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pieces: Vec<(f64, f64)>,
}

impl Region {
    /// Sorts and merges the given intervals.
    pub fn new(intervals: &[(f64, f64)]) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for &(lo, hi) in intervals {
            if lo.is_nan() || hi.is_nan() || !(lo < hi) {
                return Err(Error::InvalidInterval(lo, hi));
            }
            v.push((lo, hi));
        }
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match pieces.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => pieces.push((lo, hi)),
            }
        }
        Ok(Region { pieces })
    }

    /// [x, ∞)
    pub fn above(x: f64) -> Self {
        Region {
            pieces: alloc::vec![(x, f64::INFINITY)],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Region::new(&[(lo, hi)])
    }

    pub fn whole() -> Self {
        Region {
            pieces: alloc::vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn contains(&self, x: f64) -> bool {
        self.pieces.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    /// Pieces clipped to [lo, hi], dropping the empty ones.
    pub fn clip(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        self.pieces
            .iter()
            .filter_map(|&(a, b)| {
                let (a, b) = (a.max(lo), b.min(hi));
                if a < b {
                    Some((a, b))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Finite endpoints, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .filter(|x| x.is_finite())
            .collect()
    }
}
