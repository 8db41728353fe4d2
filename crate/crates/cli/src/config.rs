//! JSON configuration files. Every field beyond the solver block has a
//! default; unknown fields are rejected.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use osc_core::calibration::{Calibration, EMBEDDED};
use osc_core::iteration::IterationConfig;
use osc_core::verify::VerifyOptions;

use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_hex, CalibrationRecord};

/// Drives `run-nse` and `run-vorticity`. The command fixes the scheme, so
/// `solver.mode` is overwritten.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub solver: IterationConfig,
    /// Times of the radius estimates; the solver probe times when empty.
    /// Each is moved to the nearest snapshot.
    #[serde(default)]
    pub radius_times: Vec<f64>,
    /// Strip radii of the domain probe as multiples of `c_fit t^{1/2}Φ₂(t)`.
    #[serde(default = "default_domain_fractions")]
    pub domain_fractions: Vec<f64>,
    #[serde(default)]
    pub calibration: Option<PathBuf>,
}

fn default_domain_fractions() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

/// Drives `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub corpus: VerifyOptions,
    #[serde(default)]
    pub calibration: Option<PathBuf>,
}

/// Drives `table`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub data_norms: Vec<f64>,
    pub forcing_level: f64,
    /// Iteration constant; the calibrated one when absent.
    pub constant: Option<f64>,
    /// Exponents of the vorticity horizon columns.
    pub p_values: Vec<f64>,
    pub calibration: Option<PathBuf>,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            t_min: 1e-6,
            t_max: 10.0,
            points: 241,
            data_norms: vec![0.5, 1.0, 2.0, 4.0],
            forcing_level: 0.0,
            constant: None,
            p_values: vec![1.0, 2.0],
            calibration: None,
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Serialised form whose hash identifies the resolved configuration.
pub fn canonical_json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn config_hash<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(sha256_hex(canonical_json(value)?.as_bytes()))
}

/// The file at `path`, or the embedded calibration.
pub fn load_calibration(path: Option<&Path>) -> CliResult<(Calibration, CalibrationRecord)> {
    match path {
        None => {
            let cal = Calibration::embedded();
            let record = CalibrationRecord {
                source: "embedded".into(),
                version: cal.version,
                sha256: sha256_hex(EMBEDDED.as_bytes()),
            };
            Ok((cal, record))
        }
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read calibration {}: {e}", p.display())))?;
            let cal = Calibration::parse(&text)
                .map_err(|e| CliError::Config(format!("calibration {}: {e}", p.display())))?;
            let record = CalibrationRecord {
                source: p.display().to_string(),
                version: cal.version,
                sha256: sha256_hex(text.as_bytes()),
            };
            Ok((cal, record))
        }
    }
}
