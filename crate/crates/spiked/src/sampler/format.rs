//! Binary sample files and CSV export.
//!
//! Layout, all little-endian: magic `SPKSMPL\0`, version u32, method u32
//! (0 exact, 1 mcmc), n u64, spike count u64, spikes f64…, seed u64,
//! thinning u64, trials u64, then trials × n eigenvalues as f64, each trial
//! sorted descending.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Method, SampleBatch};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"SPKSMPL\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_batch_to<W: Write>(batch: &SampleBatch, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let method: u32 = match batch.method {
        Method::Exact => 0,
        Method::Mcmc => 1,
    };
    w.write_all(&method.to_le_bytes())?;
    w.write_all(&(batch.n as u64).to_le_bytes())?;
    w.write_all(&(batch.spikes.len() as u64).to_le_bytes())?;
    for a in &batch.spikes {
        w.write_all(&a.to_le_bytes())?;
    }
    w.write_all(&batch.seed.to_le_bytes())?;
    w.write_all(&batch.thinning.to_le_bytes())?;
    w.write_all(&(batch.trials() as u64).to_le_bytes())?;
    for x in &batch.eigenvalues {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_batch(batch: &SampleBatch, path: &Path) -> Result<()> {
    write_batch_to(batch, BufWriter::new(File::create(path)?))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_batch_from<R: Read>(mut r: R) -> Result<SampleBatch> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a sample file".into()));
    }
    let version = read_u32(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let method = match read_u32(&mut r)? {
        0 => Method::Exact,
        1 => Method::Mcmc,
        t => return Err(Error::Format(format!("unknown method tag {t}"))),
    };
    let n = read_u64(&mut r)? as usize;
    let m = read_u64(&mut r)? as usize;
    if m > n {
        return Err(Error::Format("more spikes than the dimension".into()));
    }
    let spikes = (0..m).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let seed = read_u64(&mut r)?;
    let thinning = read_u64(&mut r)?;
    let trials = read_u64(&mut r)? as usize;
    let count = trials
        .checked_mul(n)
        .ok_or_else(|| Error::Format("record count overflows".into()))?;
    let mut eigenvalues = Vec::with_capacity(count.min(1 << 26));
    for _ in 0..count {
        eigenvalues.push(read_f64(&mut r)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes".into()));
    }
    Ok(SampleBatch { n, spikes, seed, method, thinning, eigenvalues, diagnostics: None })
}

pub fn read_batch(path: &Path) -> Result<SampleBatch> {
    read_batch_from(BufReader::new(File::open(path)?))
}

/// One row per trial, columns lambda_1 ≥ … ≥ lambda_n.
pub fn write_csv<W: Write>(batch: &SampleBatch, mut w: W) -> Result<()> {
    let header: Vec<String> = (1..=batch.n).map(|k| format!("lambda_{k}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for t in 0..batch.trials() {
        let row: Vec<String> = batch.trial(t).iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}
