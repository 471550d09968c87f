//! The `spiked` command line.
//!
//! Exit codes: 0 success, 1 a check failed (verify residual over tolerance,
//! compare KS over `ks_max`, MCMC non-convergence), 2 bad configuration or
//! arguments.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use spiked_core::equilibrium::{solve_equilibrium, EquilibriumData};
use spiked_core::finite::{build_basis, expectation_rank_m_direct, expectation_rank_m_identity, Region};
use spiked_core::laws::{f1, fk, gk, gk_jth, gk_jth_with, gk_zero, normal_cdf, tw_jth};
use spiked_core::phase::{big_g2, big_h2, c_of_a, phase_portrait, x0_of_a, PhasePortrait};
use spiked_core::potential::{Potential, PotentialKind};
use spiked_core::transitions::{
    jump_scaling, jump_scaling_tilde, mixture_prediction, p_m, p_tilde_m, JumpScaling, OneCutFrame, Point,
    TransitionResult,
};
use spiked_core::{Complex64, Error as CoreError};

use crate::config::{ExperimentConfig, VerifyCase};
use crate::io::{empirical_cdf, write_comparison_csv, write_json, write_law_csv, TransitionRecord};
use crate::oracle::{tensor_expectation, MAX_ORACLE_D};
use crate::regime::{resolve, SpikeSpec};
use crate::sampler::{
    ks_distance, rescale, sample_gaussian_spiked, sample_general_mcmc, write_batch, write_csv, Centering, SampleBatch,
};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "spiked", version, about = "Spiked Hermitian matrix models: phase diagram, limit laws, sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium measure, a_c, x0 table and secondary critical values (JSON).
    Phase(Common),
    /// Tabulate limit laws, one `T,value` CSV per law.
    Law(Common),
    /// Identity vs direct vs brute-force route equivalence.
    Verify(Common),
    /// Draw eigenvalue samples into a binary file.
    Sample(Common),
    /// Sample, rescale and compare against the predicted limit laws.
    Compare(Common),
    /// Jump probabilities at a discontinuous transition (JSON).
    Transition(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML experiment file; defaults apply when omitted.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Overrides run.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides output.dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failed,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub fn exit_code(r: &Result<Outcome>) -> i32 {
    match r {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::Failed) => EXIT_FAILED,
        Err(Error::NonConvergence(_)) | Err(Error::Lapack(_)) => EXIT_FAILED,
        Err(_) => EXIT_CONFIG,
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let r = execute(&cli.command, &mut out);
    if let Err(e) = &r {
        eprintln!("error: {e}");
    }
    exit_code(&r)
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.run.seed = s;
    }
    if let Some(d) = &common.out {
        cfg.output.dir = d.clone();
    }
    Ok(cfg)
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<Outcome> {
    let (common, f): (&Common, fn(&ExperimentConfig, &mut dyn Write) -> Result<Outcome>) = match cmd {
        Command::Phase(c) => (c, cmd_phase),
        Command::Law(c) => (c, cmd_law),
        Command::Verify(c) => (c, cmd_verify),
        Command::Sample(c) => (c, cmd_sample),
        Command::Compare(c) => (c, cmd_compare),
        Command::Transition(c) => (c, cmd_transition),
    };
    let cfg = load(common)?;
    f(&cfg, out)
}

fn emit(cfg: &ExperimentConfig, out: &mut dyn Write, report: &Value) -> Result<()> {
    match &cfg.output.report {
        Some(p) => write_json(p, report),
        None => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn equilibrium(p: &Potential) -> Result<EquilibriumData> {
    Ok(solve_equilibrium(p)?)
}

#[derive(Debug, Serialize)]
struct X0Row {
    a: f64,
    x0: Option<f64>,
    g2: Option<f64>,
    secondary_critical: bool,
    error: Option<String>,
}

pub fn cmd_phase(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let pot = cfg.potential.build()?;
    let eq = equilibrium(&pot)?;
    let ph = &cfg.phase;
    if !(ph.a_max > 0.0) {
        return Err(Error::Config("phase.a_max must be positive".into()));
    }
    let portrait = phase_portrait(&eq, ph.a_max, ph.scan_points)?;
    let table_a: Vec<f64> = match &ph.x0_at {
        Some(v) => v.clone(),
        None => (1..=10).map(|i| portrait.a_c + (ph.a_max - portrait.a_c) * i as f64 / 10.0).collect(),
    };
    let table: Vec<X0Row> = table_a
        .iter()
        .map(|&a| match x0_of_a(&eq, a) {
            Ok(l) => X0Row { a, x0: Some(l.x0), g2: Some(l.second_deriv), secondary_critical: l.is_secondary_critical, error: None },
            Err(e) => X0Row { a, x0: None, g2: None, secondary_critical: false, error: Some(e.to_string()) },
        })
        .collect();
    let sc: Vec<Value> = portrait
        .secondary_criticals
        .iter()
        .map(|s| json!({"a": s.a, "x1": s.x1, "x2": s.x2, "gap": s.gap}))
        .collect();
    let report = json!({
        "potential": pot.coeffs(),
        "left_endpoint": eq.left_endpoint,
        "right_endpoint": eq.right_endpoint,
        "beta": eq.beta,
        "robin_constant": eq.robin_constant,
        "a_c": portrait.a_c,
        "continuous_transition": portrait.is_continuous_transition,
        "half_slope": portrait.half_slope,
        "x0_table": table,
        "secondary_criticals": sc,
    });
    emit(cfg, out, &report)?;
    Ok(Outcome::Success)
}

/// Values of one named law on the grid.
pub fn law_values(name: &str, j: usize, k: Option<usize>, alphas: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let one = Complex64::new(1.0, 0.0);
    let size = k.unwrap_or(alphas.len().max(1));
    let f = |t: f64| -> std::result::Result<f64, CoreError> {
        Ok(match name {
            "tw" => tw_jth(t, 1)?,
            "tw_j" => tw_jth(t, j)?,
            "f1" => match alphas {
                [a] => f1(t, *a, one)?.re,
                _ => return Err(CoreError::InvalidArgument("f1 takes exactly one alpha")),
            },
            "fk" => fk(t, alphas, one)?.re,
            "gk" => {
                if alphas.is_empty() {
                    gk_zero(t, size, one)?.re
                } else {
                    gk(t, alphas, one)?.re
                }
            }
            "gk_j" => {
                if alphas.is_empty() {
                    gk_jth(t, j, size)?
                } else {
                    gk_jth_with(t, j, alphas)?
                }
            }
            "normal" => normal_cdf(t),
            _ => return Err(CoreError::InvalidArgument("unknown law")),
        })
    };
    if !["tw", "tw_j", "f1", "fk", "gk", "gk_j", "normal"].contains(&name) {
        return Err(Error::Config(format!("unknown law {name:?}")));
    }
    if !alphas.is_empty() && k.is_some_and(|k| k != alphas.len()) {
        return Err(Error::Config("law.k must equal the number of alphas".into()));
    }
    Ok(grid.iter().map(|&t| f(t)).collect::<std::result::Result<Vec<_>, _>>()?)
}

pub fn cmd_law(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let law = cfg.law.as_ref().ok_or_else(|| Error::Config("law: missing [law] section".into()))?;
    if law.names.is_empty() {
        return Err(Error::Config("law.names is empty".into()));
    }
    let grid = cfg.grid.points()?;
    let mut files = Vec::new();
    for name in &law.names {
        let values = law_values(name, law.j, law.k, &law.alphas, &grid)?;
        let path = cfg.output.dir.join(format!("{name}.csv"));
        write_law_csv(&path, &grid, &values)?;
        files.push(path.display().to_string());
    }
    emit(cfg, out, &json!({"rows": grid.len(), "files": files}))?;
    Ok(Outcome::Success)
}

fn default_cases(pot: &Potential) -> Vec<VerifyCase> {
    let above = |x: f64| vec![[x, f64::INFINITY]];
    let case = |d: usize, spikes: &[f64], e: f64| VerifyCase { d, n: None, spikes: spikes.to_vec(), region: above(e) };
    if pot.kind == PotentialKind::Gaussian {
        vec![case(3, &[0.5, 0.9], 1.5), case(4, &[0.5, 0.9], 1.5), case(3, &[0.4, 1.1], 1.0), case(2, &[0.7], 0.5)]
    } else {
        vec![case(3, &[0.4, 0.8], 1.0), case(2, &[0.6], 0.5)]
    }
}

/// One row of the route-equivalence suite.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub d: usize,
    pub n: f64,
    pub spikes: Vec<f64>,
    pub s: [f64; 2],
    pub direct: [f64; 2],
    pub identity_residual: f64,
    pub oracle_residual: Option<f64>,
}

pub fn verify_case(pot: &Potential, case: &VerifyCase, s: Complex64) -> Result<VerifyRow> {
    let n = case.n.unwrap_or(case.d as f64);
    let pieces: Vec<(f64, f64)> = case.region.iter().map(|p| (p[0], p[1])).collect();
    let region = Region::new(&pieces)?;
    let basis = build_basis(pot, n, case.d)?;
    let direct = expectation_rank_m_direct(&basis, case.d, &case.spikes, &region, s)?;
    let identity = expectation_rank_m_identity(&basis, case.d, &case.spikes, &region, s)?;
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / (1.0 + b.norm());
    let oracle_residual = if case.d <= MAX_ORACLE_D {
        Some(rel(direct, tensor_expectation(pot, n, case.d, &case.spikes, &region, s)?))
    } else {
        None
    };
    Ok(VerifyRow {
        d: case.d,
        n,
        spikes: case.spikes.clone(),
        s: [s.re, s.im],
        direct: [direct.re, direct.im],
        identity_residual: rel(identity, direct),
        oracle_residual,
    })
}

pub fn cmd_verify(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let pot = cfg.potential.build()?;
    let spec = cfg.verify.clone().unwrap_or_default();
    let tol = spec.tolerance.unwrap_or(1e-6);
    let s_grid: Vec<Complex64> = match &spec.s {
        Some(v) => v.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        None => vec![Complex64::new(1.0, 0.0), Complex64::new(0.6, 0.0), Complex64::new(1.0, 0.2)],
    };
    let cases = spec.cases.clone().unwrap_or_else(|| default_cases(&pot));
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for case in &cases {
        for &s in &s_grid {
            let row = verify_case(&pot, case, s)?;
            let r = row.identity_residual.max(row.oracle_residual.unwrap_or(0.0));
            worst = worst.max(r);
            writeln!(
                out,
                "{} d={} spikes={:?} s={}{:+}i identity={:.3e} oracle={}",
                if r < tol { "PASS" } else { "FAIL" },
                row.d,
                row.spikes,
                s.re,
                s.im,
                row.identity_residual,
                row.oracle_residual.map_or("-".into(), |x| format!("{x:.3e}")),
            )?;
            rows.push(row);
        }
    }
    let pass = worst < tol;
    writeln!(out, "worst residual {worst:.3e} (tolerance {tol:e})")?;
    if let Some(p) = &cfg.output.report {
        write_json(p, &json!({"tolerance": tol, "worst": worst, "pass": pass, "cases": rows}))?;
    }
    Ok(if pass { Outcome::Success } else { Outcome::Failed })
}

/// Draws the configured batch for the given spikes.
fn draw(cfg: &ExperimentConfig, pot: &Potential, n: usize, spikes: &[f64]) -> Result<SampleBatch> {
    let exact = match cfg.run.method.as_str() {
        "exact" => {
            if pot.kind != PotentialKind::Gaussian {
                return Err(Error::Config("exact sampling needs the gaussian potential".into()));
            }
            true
        }
        "mcmc" => false,
        "auto" => pot.kind == PotentialKind::Gaussian,
        m => return Err(Error::Config(format!("run.method: unknown {m:?}"))),
    };
    if exact {
        sample_gaussian_spiked(n, spikes, cfg.run.trials, cfg.run.seed)
    } else {
        sample_general_mcmc(pot, n, spikes, cfg.run.trials, cfg.run.steps, cfg.run.seed)
    }
}

fn resolved_spikes(cfg: &ExperimentConfig, pot: &Potential, n: usize) -> Result<(Vec<f64>, Option<Value>)> {
    match cfg.model.spike_spec()? {
        SpikeSpec::Explicit(s) => Ok((s, None)),
        spec => {
            let eq = equilibrium(pot)?;
            let portrait = portrait_for(cfg, &eq)?;
            let r = resolve(&eq, &portrait, n, &spec)?;
            let meta = json!({"regime": r.name, "notes": r.notes});
            Ok((r.spikes, Some(meta)))
        }
    }
}

fn portrait_for(cfg: &ExperimentConfig, eq: &EquilibriumData) -> Result<PhasePortrait> {
    Ok(phase_portrait(eq, cfg.phase.a_max, cfg.phase.scan_points)?)
}

pub fn cmd_sample(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let pot = cfg.potential.build()?;
    let n = cfg.model.n()?;
    let (spikes, meta) = resolved_spikes(cfg, &pot, n)?;
    let batch = draw(cfg, &pot, n, &spikes)?;
    let path = cfg.output.samples.clone().unwrap_or_else(|| cfg.output.dir.join("samples.bin"));
    if let Some(p) = path.parent() {
        if !p.as_os_str().is_empty() {
            std::fs::create_dir_all(p)?;
        }
    }
    write_batch(&batch, &path)?;
    let mut files = vec![path.display().to_string()];
    if cfg.output.csv {
        let csv = path.with_extension("csv");
        write_csv(&batch, std::io::BufWriter::new(std::fs::File::create(&csv)?))?;
        files.push(csv.display().to_string());
    }
    let diag = batch.diagnostics.as_ref().map(|d| {
        json!({"sweeps": d.sweeps, "burn_in": d.burn_in, "thinning": d.thinning,
               "step": d.step, "acceptance": d.acceptance, "rhat": d.rhat})
    });
    let report = json!({
        "n": n, "spikes": spikes, "regime": meta, "trials": batch.trials(), "seed": batch.seed,
        "method": batch.method.name(), "thinning": batch.thinning, "mcmc": diag, "files": files,
    });
    emit(cfg, out, &report)?;
    Ok(Outcome::Success)
}

fn centering_json(c: &Centering) -> Value {
    match *c {
        Centering::Edge { e, beta } => json!({"mode": "edge", "e": e, "beta": beta}),
        Centering::Outlier { x_star, g2 } => json!({"mode": "outlier", "x_star": x_star, "g2": g2}),
    }
}

pub fn cmd_compare(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let pot = cfg.potential.build()?;
    let n = cfg.model.n()?;
    let eq = equilibrium(&pot)?;
    let portrait = portrait_for(cfg, &eq)?;
    let regime = resolve(&eq, &portrait, n, &cfg.model.spike_spec()?)?;
    let batch = draw(cfg, &pot, n, &regime.spikes)?;
    let grid = cfg.grid.points()?;
    let mut rows = Vec::new();
    let mut fail = false;
    for (i, pred) in regime.predictions.iter().enumerate() {
        let stat = rescale(&batch, pred.k, pred.centering)?;
        let table = pred.law.tabulate(&grid)?;
        let ks = ks_distance(&stat.values, |x| table.cdf(x))?;
        let emp = empirical_cdf(&stat.values, &grid);
        let path = cfg.output.dir.join(format!("compare_{}_k{}.csv", i + 1, pred.k));
        write_comparison_csv(&path, &grid, &emp, &table.values)?;
        if cfg.compare.ks_max.is_some_and(|m| ks > m) {
            fail = true;
        }
        rows.push(json!({
            "k": pred.k, "centering": centering_json(&pred.centering), "law": pred.law.label(),
            "ks": ks, "csv": path.display().to_string(),
        }));
    }
    let report = json!({
        "regime": regime.name, "n": n, "spikes": regime.spikes, "notes": regime.notes,
        "trials": batch.trials(), "seed": batch.seed, "method": batch.method.name(),
        "transition": regime.transition.as_ref().map(TransitionRecord::from),
        "comparisons": rows, "ks_max": cfg.compare.ks_max, "pass": !fail,
    });
    emit(cfg, out, &report)?;
    Ok(if fail { Outcome::Failed } else { Outcome::Success })
}

fn scaling_json(s: std::result::Result<JumpScaling, CoreError>, n: Option<usize>, a: f64, alphas: &[f64]) -> Value {
    match s {
        Ok(s) => json!({"q": s.q, "K": s.k, "spikes": n.map(|n| s.spikes(a, n, alphas))}),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn mixtures_json(r: &TransitionResult, points: &[Point]) -> Vec<Value> {
    let mut v = Vec::new();
    for k in 1..=r.mm {
        for &p in points {
            if let Ok(mix) = mixture_prediction(r, k, p) {
                let at = |t: f64| mix.cdf(t).ok();
                v.push(json!({
                    "k": k, "point": format!("{p:?}"),
                    "terms": mix.terms.iter().map(|(w, c)| json!({"weight": w, "component": format!("{c:?}")})).collect::<Vec<_>>(),
                    "total_mass": mix.total_mass(), "cdf_at_minus_8": at(-8.0), "cdf_at_plus_8": at(8.0),
                }));
            }
        }
    }
    v
}

pub fn cmd_transition(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let spec = cfg.transition.as_ref().ok_or_else(|| Error::Config("transition: missing [transition] section".into()))?;
    let pot = cfg.potential.build()?;
    let eq = equilibrium(&pot)?;
    let portrait = portrait_for(cfg, &eq)?;
    let frame = OneCutFrame::from_equilibrium(&eq);
    let (mm, m, alphas) = (spec.alphas.len(), spec.m, &spec.alphas);
    let report = match spec.kind.as_str() {
        "secondary" => {
            let sc = match spec.a {
                Some(a) => portrait
                    .secondary_criticals
                    .iter()
                    .min_by(|p, q| (p.a - a).abs().partial_cmp(&(q.a - a).abs()).unwrap()),
                None => portrait.secondary_criticals.first(),
            }
            .ok_or_else(|| Error::Config("no secondary critical value in (a_c, phase.a_max]".into()))?;
            let r = p_m(&frame, sc.x1, sc.x2, mm, m, alphas)?;
            let (g1, g2) = (big_g2(&eq, sc.x1)?, big_g2(&eq, sc.x2)?);
            json!({
                "kind": "secondary", "a_star": sc.a, "x1": sc.x1, "x2": sc.x2, "g2_x1": g1, "g2_x2": g2,
                "result": TransitionRecord::from(&r),
                "scaling": scaling_json(jump_scaling(sc.x1, sc.x2, g1, g2, mm, m), cfg.model.n, sc.a, alphas),
                "mixtures": mixtures_json(&r, &[Point::Upper, Point::Lower]),
            })
        }
        "critical" => {
            if portrait.is_continuous_transition {
                return Err(Error::Config("the transition at a_c is continuous; no jump probabilities".into()));
            }
            let a = portrait.a_c + 1e-6;
            let c = c_of_a(&eq, a)?;
            let x0 = x0_of_a(&eq, a)?.x0;
            let (h2, g2) = (big_h2(&eq, c)?, big_g2(&eq, x0)?);
            let r = p_tilde_m(&frame, c, x0, mm, m, alphas)?;
            json!({
                "kind": "critical", "a_c": portrait.a_c, "c": c, "x0": x0, "h2_c": h2, "g2_x0": g2,
                "result": TransitionRecord::from(&r),
                "scaling": scaling_json(jump_scaling_tilde(c, x0, h2, g2, mm, m), cfg.model.n, portrait.a_c, alphas),
                "mixtures": mixtures_json(&r, &[Point::Upper, Point::Edge]),
            })
        }
        k => return Err(Error::Config(format!("transition.kind: unknown {k:?}"))),
    };
    emit(cfg, out, &report)?;
    Ok(Outcome::Success)
}

/// Convenience for tests and scripts: runs one command on a config file.
pub fn run_with_config(cmd: &str, config: &Path, out: &mut dyn Write) -> Result<Outcome> {
    let common = Common { config: Some(config.to_path_buf()), seed: None, out: None };
    let c = match cmd {
        "phase" => Command::Phase(common),
        "law" => Command::Law(common),
        "verify" => Command::Verify(common),
        "sample" => Command::Sample(common),
        "compare" => Command::Compare(common),
        "transition" => Command::Transition(common),
        other => return Err(Error::Config(format!("unknown command {other:?}"))),
    };
    execute(&c, out)
}
