//! `run-nse` and `run-vorticity`: solver, analyticity probe, run directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use osc_core::analyticity::{
    domain_csv, domain_linf_sup, estimate_radius, probe_domain_norms, radius_csv, radius_growth, RadiusEstimate,
    RadiusGrowth,
};
use osc_core::calibration::Calibration;
use osc_core::error::OscError;
use osc_core::iteration::{ConvergenceReport, DataPiece, Iteration, IterationState, Mode, RunSetup};
use osc_core::spectral::dump::write_field;
use osc_core::weights::big_phi2;

use crate::config::{canonical_json, config_hash, load_calibration, read_json, RunConfig};
use crate::error::{CliError, CliResult, EXIT_DIVERGENCE, EXIT_OK};
use crate::fmt_f64;
use crate::manifest::ManifestWriter;

pub const MONITORS_HEADER: &str = "n,weighted_linf,besov,bmo,fourth,recovered_velocity,max,difference";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    /// Still contracting when the iteration budget ran out.
    MaxIterations,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationUsed {
    pub iteration_constant: f64,
    pub biot_savart_constant: f64,
    pub regression_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub estimates: Vec<RadiusEstimate>,
    pub growth: Option<RadiusGrowth>,
    /// `δ̂` never decreases between consecutive probe times.
    pub strictly_nondecreasing: bool,
    pub domain_linf_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub verdict: Verdict,
    pub scheme: Mode,
    pub calibration: CalibrationUsed,
    pub setup: RunSetup,
    pub convergence: Option<ConvergenceReport>,
    pub divergence: Option<String>,
    pub radius: Option<RadiusReport>,
}

pub struct RunOutcome {
    pub exit_code: i32,
    pub report: RunReport,
    /// The final iterate, when the run produced one.
    pub state: Option<IterationState>,
}

/// Reads and resolves a run configuration: the scheme is set, the seed
/// override applied, and relative paths anchored at the file's directory.
pub fn resolve_run_config(path: &Path, mode: Mode, seed: Option<u64>) -> CliResult<RunConfig> {
    let mut cfg: RunConfig = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.solver.mode = mode;
    if let Some(s) = seed {
        cfg.solver.seed = s;
    }
    if !cfg.domain_fractions.iter().all(|f| f.is_finite() && *f >= 0.0) {
        return Err(CliError::Config("domain_fractions must be finite and ≥ 0".into()));
    }
    let anchor = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    if let Some(p) = cfg.calibration.as_mut() {
        anchor(p);
    }
    for piece in cfg.solver.initial.iter_mut() {
        if let DataPiece::File { path } = piece {
            anchor(path);
        }
    }
    Ok(cfg)
}

fn input_files(path: &Path, cfg: &RunConfig) -> Vec<PathBuf> {
    let mut inputs = vec![path.to_path_buf()];
    inputs.extend(cfg.calibration.clone());
    for piece in &cfg.solver.initial {
        if let DataPiece::File { path } = piece {
            inputs.push(path.clone());
        }
    }
    inputs
}

pub fn cmd_run(config_path: &Path, mode: Mode, output: &Path, seed: Option<u64>) -> CliResult<RunOutcome> {
    let cfg = resolve_run_config(config_path, mode, seed)?;
    let (cal, record) = load_calibration(cfg.calibration.as_deref())?;
    let command = match mode {
        Mode::Velocity => "run-nse",
        Mode::Vorticity => "run-vorticity",
    };
    let mut manifest =
        ManifestWriter::start(command, config_hash(&cfg)?, input_files(config_path, &cfg), output, Some(record))?;
    std::fs::write(output.join("config.json"), canonical_json(&cfg)?)?;
    let result = execute(&cfg, &cal, output, &mut manifest);
    match &result {
        Ok(outcome) => {
            let status = match outcome.report.verdict {
                Verdict::Converged => "converged",
                Verdict::MaxIterations => "max_iterations",
                Verdict::Diverged => "diverged",
            };
            manifest.finish(status, outcome.exit_code)?;
        }
        Err(e) => {
            log::error!("{e}");
            manifest.finish("error", e.exit_code())?;
        }
    }
    result
}

fn execute(cfg: &RunConfig, cal: &Calibration, out: &Path, manifest: &mut ManifestWriter) -> CliResult<RunOutcome> {
    let it = Iteration::new(&cfg.solver, cal)?;
    for w in &it.setup().warnings {
        manifest.warn(w.clone());
    }
    manifest.phase("setup")?;
    let calibration = CalibrationUsed {
        iteration_constant: it.setup().constant,
        biot_savart_constant: cal.biot_savart_constant,
        regression_factor: cal.regression_factor,
    };

    let mut monitors = BufWriter::new(File::create(out.join("monitors.csv"))?);
    writeln!(monitors, "{MONITORS_HEADER}")?;
    let mut io_error: Option<std::io::Error> = None;
    let run = it.run_observed(&mut |state: &IterationState| {
        let Some(m) = state.monitors.last() else { return };
        let row = format!(
            "{},{},{},{},{},{},{},{}",
            m.n,
            fmt_f64(m.weighted_linf),
            fmt_f64(m.besov),
            fmt_f64(m.bmo),
            fmt_f64(m.fourth),
            m.recovered_velocity.map(fmt_f64).unwrap_or_default(),
            fmt_f64(m.max),
            state.last_difference().map(fmt_f64).unwrap_or_default()
        );
        // flushed per iterate so an interrupted run keeps its history
        if let Err(e) = writeln!(monitors, "{row}").and_then(|_| monitors.flush()) {
            io_error.get_or_insert(e);
        }
    });
    drop(monitors);
    if let Some(e) = io_error {
        return Err(e.into());
    }
    manifest.phase("iteration")?;

    let (state, conv) = match run {
        Ok(pair) => pair,
        Err(OscError::Divergence { iterate, detail }) => {
            let msg = format!("iteration diverged at n = {iterate}: {detail}");
            log::warn!("{msg}");
            manifest.warn(msg.clone());
            let report = RunReport {
                verdict: Verdict::Diverged,
                scheme: cfg.solver.mode,
                calibration,
                setup: it.setup().clone(),
                convergence: None,
                divergence: Some(msg),
                radius: None,
            };
            write_report(out, &report)?;
            return Ok(RunOutcome { exit_code: EXIT_DIVERGENCE, report, state: None });
        }
        Err(e) => return Err(e.into()),
    };

    let mut residuals = String::from("t,re,im\n");
    for r in &conv.residuals {
        residuals.push_str(&format!("{},{},{}\n", fmt_f64(r.t), fmt_f64(r.re), fmt_f64(r.im)));
    }
    std::fs::write(out.join("residuals.csv"), residuals)?;

    let verdict = if conv.converged {
        Verdict::Converged
    } else if conv.contracting {
        let msg = format!("no convergence within {} iterates, still contracting", conv.iterations);
        log::warn!("{msg}");
        manifest.warn(msg);
        Verdict::MaxIterations
    } else {
        Verdict::Diverged
    };
    let probe_times = radius_times(cfg);
    write_snapshots(out, &state, &probe_times, cfg.solver.mode)?;
    manifest.phase("snapshots")?;

    let radius = if verdict == Verdict::Diverged {
        None
    } else {
        let r = probe(out, cfg, &state, &probe_times, manifest)?;
        manifest.phase("analyticity")?;
        Some(r)
    };
    let report = RunReport {
        verdict,
        scheme: cfg.solver.mode,
        calibration,
        setup: it.setup().clone(),
        convergence: Some(conv),
        divergence: None,
        radius,
    };
    write_report(out, &report)?;
    let exit_code = if verdict == Verdict::Diverged { EXIT_DIVERGENCE } else { EXIT_OK };
    Ok(RunOutcome { exit_code, report, state: Some(state) })
}

fn write_report(out: &Path, report: &RunReport) -> CliResult<()> {
    std::fs::write(out.join("report.json"), canonical_json(report)?)?;
    Ok(())
}

/// Configured radius times, else the solver probe times, else `T/16, T/4, T`.
fn radius_times(cfg: &RunConfig) -> Vec<f64> {
    let t = cfg.solver.horizon;
    let mut times = if !cfg.radius_times.is_empty() {
        cfg.radius_times.clone()
    } else if !cfg.solver.probe_times.is_empty() {
        cfg.solver.probe_times.clone()
    } else {
        vec![t / 16.0, t / 4.0, t]
    };
    times.sort_by(|a, b| a.total_cmp(b));
    times
}

fn nearest_snapshot(times: &[f64], t: f64) -> usize {
    let mut best = 0;
    for (i, s) in times.iter().enumerate() {
        if (s - t).abs() < (times[best] - t).abs() {
            best = i;
        }
    }
    best
}

fn write_snapshots(out: &Path, state: &IterationState, probe: &[f64], mode: Mode) -> CliResult<()> {
    let dir = out.join("snapshots");
    std::fs::create_dir_all(&dir)?;
    let prefix = match mode {
        Mode::Velocity => "u",
        Mode::Vorticity => "w",
    };
    let mut idx: Vec<usize> = probe.iter().map(|&t| nearest_snapshot(&state.times, t)).collect();
    idx.push(state.times.len() - 1);
    idx.sort_unstable();
    idx.dedup();
    let mut index = String::from("index,t,re,im\n");
    for i in idx {
        let (re, im) = (format!("{prefix}_{i:04}_re.oscf"), format!("{prefix}_{i:04}_im.oscf"));
        write_field(&dir.join(&re), &state.fields[i].re)?;
        write_field(&dir.join(&im), &state.fields[i].im)?;
        index.push_str(&format!("{i},{},{re},{im}\n", fmt_f64(state.times[i])));
    }
    std::fs::write(dir.join("index.csv"), index)?;
    Ok(())
}

fn probe(
    out: &Path,
    cfg: &RunConfig,
    state: &IterationState,
    times: &[f64],
    manifest: &mut ManifestWriter,
) -> CliResult<RadiusReport> {
    let mut estimates = Vec::new();
    for &t in times {
        let i = nearest_snapshot(&state.times, t);
        let field = state.fields[i].combined();
        if field.is_zero() {
            let msg = format!("limit vanishes at t = {}; no radius estimate", state.times[i]);
            log::warn!("{msg}");
            manifest.warn(msg);
            continue;
        }
        estimates.push(estimate_radius(&field, state.times[i])?);
    }
    let growth = if estimates.is_empty() { None } else { Some(radius_growth(&estimates)?) };
    let c_fit = growth.as_ref().map_or(f64::NAN, |g| g.c_fit);
    std::fs::write(out.join("radius.csv"), radius_csv(&estimates, c_fit))?;

    let mut rows = Vec::new();
    for e in &estimates {
        let i = nearest_snapshot(&state.times, e.t);
        let scale = if c_fit.is_finite() && c_fit > 0.0 { c_fit * e.t.sqrt() * big_phi2(e.t)? } else { 0.0 };
        let mut radii: Vec<f64> = cfg.domain_fractions.iter().map(|f| f * scale).collect();
        radii.dedup();
        rows.extend(probe_domain_norms(&state.fields[i], e.t, &radii, cfg.solver.seed)?);
    }
    std::fs::write(out.join("domain_norms.csv"), domain_csv(&rows))?;
    let strictly_nondecreasing = estimates.windows(2).all(|w| w[1].radius >= w[0].radius);
    Ok(RadiusReport { estimates, growth, strictly_nondecreasing, domain_linf_sup: domain_linf_sup(&rows) })
}
