//! `osc`: solver runs, estimate verification and weight tables.
//!
//! Exit codes: 0 ok, 1 I/O or internal failure, 2 configuration error,
//! 3 divergence, 4 bound regression.

pub mod config;
pub mod error;
pub mod manifest;
pub mod run;
pub mod table;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use osc_core::iteration::Mode;
use osc_core::verify::Lemma;

use crate::config::{read_json, TableConfig};
use crate::error::{CliError, CliResult, EXIT_OK};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "OSC_THREADS";

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Parser)]
#[command(name = "osc", version, about = "Complexified Picard iteration for Navier–Stokes in BMO-type spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Weights,
    Horizons,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Velocity scheme, then the analyticity probe on its limit.
    RunNse {
        config: PathBuf,
        #[arg(long, default_value = "run")]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Vorticity scheme, then the analyticity probe on its limit.
    RunVorticity {
        config: PathBuf,
        #[arg(long, default_value = "run")]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Bound reports against the frozen constants.
    Verify {
        /// Corpus configuration (JSON); defaults apply when omitted.
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "lemma")]
        all: bool,
        #[arg(long, value_parser = parse_lemma)]
        lemma: Vec<Lemma>,
        /// Freeze new constants into `<output>/calibration.json`.
        #[arg(long)]
        calibrate: bool,
        #[arg(long, default_value = "verify")]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// CSV table on stdout.
    Table {
        kind: TableKind,
        config: Option<PathBuf>,
    },
}

fn parse_lemma(s: &str) -> Result<Lemma, String> {
    s.parse().map_err(|e: osc_core::error::OscError| e.to_string())
}

/// Caps the global thread pool from [`THREADS_ENV`].
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

/// Runs one command and returns its exit code; output for the user goes
/// to stdout, diagnostics to the log.
pub fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::RunNse { config, output, seed } => report_run(run::cmd_run(&config, Mode::Velocity, &output, seed)?),
        Command::RunVorticity { config, output, seed } => {
            report_run(run::cmd_run(&config, Mode::Vorticity, &output, seed)?)
        }
        Command::Verify { config, all, lemma, calibrate, output, seed } => {
            let lemmas = if all { Lemma::ALL.to_vec() } else { lemma };
            let outcome = verify::cmd_verify(&verify::VerifyRequest { config, lemmas, calibrate, output, seed })?;
            for line in &outcome.lines {
                println!("{line}");
            }
            Ok(outcome.exit_code)
        }
        Command::Table { kind, config } => {
            let cfg: TableConfig = match config {
                Some(p) => read_json(&p)?,
                None => TableConfig::default(),
            };
            let csv = match kind {
                TableKind::Weights => table::weights_csv(&cfg)?,
                TableKind::Horizons => table::horizons_csv(&cfg)?,
            };
            print!("{csv}");
            Ok(EXIT_OK)
        }
    }
}

fn report_run(outcome: run::RunOutcome) -> CliResult<i32> {
    let r = &outcome.report;
    let verdict = serde_json::to_string(&r.verdict)?;
    let mut line = format!("{} {}", verdict.trim_matches('"'), serde_json::to_string(&r.scheme)?.trim_matches('"'));
    if let Some(c) = &r.convergence {
        line.push_str(&format!(
            ": {} iterates, residual {:.3e}, monitor bound {}",
            c.iterations,
            c.max_residual,
            if c.monitor_bound_holds { "holds" } else { "fails" }
        ));
    }
    if let Some(msg) = &r.divergence {
        line.push_str(&format!(": {msg}"));
    }
    println!("{line}");
    Ok(outcome.exit_code)
}
