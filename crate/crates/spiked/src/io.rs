//! CSV and JSON outputs.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use spiked_core::transitions::{TransitionKind, TransitionResult};

use crate::{Error, Result};

/// 17 significant digits, enough to round-trip an f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(p) = path.parent() {
        if !p.as_os_str().is_empty() {
            fs::create_dir_all(p)?;
        }
    }
    Ok(())
}

/// Columns `T,value`.
pub fn write_law_csv(path: &Path, t: &[f64], values: &[f64]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "T,value")?;
    for (x, y) in t.iter().zip(values) {
        writeln!(w, "{},{}", fmt_f64(*x), fmt_f64(*y))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_law_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "T,value" => {}
        _ => return Err(Error::Format(format!("{}: missing T,value header", path.display()))),
    }
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Format(format!("bad CSV row: {line}")))
        };
        t.push(parse(parts.next())?);
        v.push(parse(parts.next())?);
    }
    Ok((t, v))
}

/// Columns `T,empirical,predicted`.
pub fn write_comparison_csv(path: &Path, t: &[f64], empirical: &[f64], predicted: &[f64]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "T,empirical,predicted")?;
    for i in 0..t.len() {
        writeln!(w, "{},{},{}", fmt_f64(t[i]), fmt_f64(empirical[i]), fmt_f64(predicted[i]))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub kind: String,
    pub mm: usize,
    pub m: usize,
    pub p: f64,
    pub det_p_prev: f64,
    pub det_p: f64,
    pub det_q_prev: f64,
    pub det_q: f64,
    pub odds: f64,
}

impl From<&TransitionResult> for TransitionRecord {
    fn from(r: &TransitionResult) -> Self {
        TransitionRecord {
            kind: match r.kind {
                TransitionKind::Secondary => "secondary".into(),
                TransitionKind::Critical => "critical".into(),
            },
            mm: r.mm,
            m: r.m,
            p: r.p,
            det_p_prev: r.det_p_prev,
            det_p: r.det_p,
            det_q_prev: r.det_q_prev,
            det_q: r.det_q,
            odds: r.odds,
        }
    }
}

/// Empirical CDF of a sample at the points `t`.
pub fn empirical_cdf(sample: &[f64], t: &[f64]) -> Vec<f64> {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let len = s.len() as f64;
    t.iter().map(|&x| s.partition_point(|&v| v <= x) as f64 / len).collect()
}
