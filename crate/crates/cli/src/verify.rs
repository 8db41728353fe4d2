//! `verify`: bound reports against frozen constants, or a new calibration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use osc_core::verify::{apply_frozen, freeze, write_reports, BoundReport, Check, Lemma, Verifier};

use crate::config::{canonical_json, config_hash, load_calibration, read_json, VerifyConfig};
use crate::error::{CliError, CliResult, EXIT_OK, EXIT_REGRESSION};
use crate::manifest::ManifestWriter;

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub id: String,
    pub passed: bool,
    pub max_ratio: f64,
    pub frozen: Option<f64>,
    pub rows: usize,
    pub skipped: usize,
    pub checks: Vec<Check>,
    pub notes: BTreeMap<String, f64>,
}

impl ReportSummary {
    pub fn of(r: &BoundReport, regression_factor: f64) -> Self {
        ReportSummary {
            id: r.id.clone(),
            passed: r.passed(regression_factor),
            max_ratio: r.max_ratio,
            frozen: r.frozen,
            rows: r.rows.len(),
            skipped: r.skipped,
            checks: r.checks.clone(),
            notes: r.notes.clone(),
        }
    }
}

pub struct VerifyRequest {
    pub config: Option<PathBuf>,
    pub lemmas: Vec<Lemma>,
    pub calibrate: bool,
    pub output: PathBuf,
    pub seed: Option<u64>,
}

pub struct VerifyOutcome {
    pub exit_code: i32,
    pub summaries: Vec<ReportSummary>,
    pub lines: Vec<String>,
}

pub fn cmd_verify(req: &VerifyRequest) -> CliResult<VerifyOutcome> {
    let mut cfg = match &req.config {
        Some(p) => {
            let mut c: VerifyConfig = read_json(p)?;
            if let Some(cal) = c.calibration.as_mut() {
                if cal.is_relative() {
                    *cal = p.parent().unwrap_or(Path::new(".")).join(&*cal);
                }
            }
            c
        }
        None => VerifyConfig::default(),
    };
    if let Some(s) = req.seed {
        cfg.corpus.seed = s;
    }
    if req.lemmas.is_empty() {
        return Err(CliError::Config("select --all or at least one --lemma".into()));
    }
    // a calibration run starts from the current file, or the embedded one
    let (base, record) = load_calibration(cfg.calibration.as_deref())?;
    let mut inputs: Vec<PathBuf> = req.config.iter().cloned().collect();
    inputs.extend(cfg.calibration.clone());
    let command = if req.calibrate { "verify --calibrate" } else { "verify" };
    let mut manifest = ManifestWriter::start(command, config_hash(&cfg)?, inputs, &req.output, Some(record))?;
    std::fs::write(req.output.join("config.json"), canonical_json(&cfg)?)?;
    if !req.calibrate && (base.corpus_seed != cfg.corpus.seed || base.grid_n != cfg.corpus.grid_n) {
        let msg = format!(
            "corpus (seed {}, N = {}) differs from the calibration corpus (seed {}, N = {})",
            cfg.corpus.seed, cfg.corpus.grid_n, base.corpus_seed, base.grid_n
        );
        log::warn!("{msg}");
        manifest.warn(msg);
    }
    let result = (|| {
        let mut verifier = Verifier::new(cfg.corpus);
        let mut reports = verifier.run_all(&req.lemmas)?;
        manifest.phase("reports")?;
        let cal = if req.calibrate {
            let cal = freeze(&mut reports, &base, &cfg.corpus)?;
            cal.save(&req.output.join("calibration.json"))?;
            cal
        } else {
            apply_frozen(&mut reports, &base)?;
            base.clone()
        };
        write_reports(&req.output.join("bounds"), &reports)?;
        let summaries: Vec<ReportSummary> =
            reports.iter().map(|r| ReportSummary::of(r, cal.regression_factor)).collect();
        std::fs::write(req.output.join(SUMMARY_FILE), canonical_json(&summaries)?)?;
        let lines: Vec<String> = reports.iter().map(|r| r.summary_line(cal.regression_factor)).collect();
        let all_passed = summaries.iter().all(|s| s.passed);
        let exit_code = if all_passed { EXIT_OK } else { EXIT_REGRESSION };
        Ok::<_, CliError>(VerifyOutcome { exit_code, summaries, lines })
    })();
    match &result {
        Ok(o) => manifest.finish(if o.exit_code == EXIT_OK { "passed" } else { "regression" }, o.exit_code)?,
        Err(e) => manifest.finish("error", e.exit_code())?,
    }
    result
}
