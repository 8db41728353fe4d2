//! `manifest.json`: written when a command starts and rewritten when it ends.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    /// File path, or `embedded`.
    pub source: String,
    pub version: u32,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub calibration: Option<CalibrationRecord>,
    pub crate_version: String,
    pub started_unix: f64,
    /// `running` until the command finishes.
    pub status: String,
    pub exit_code: Option<i32>,
    pub warnings: Vec<String>,
    pub phases: Vec<Phase>,
    pub wall_clock_seconds: Option<f64>,
    /// Peak resident set size in KiB, where the platform reports it.
    pub peak_memory_kib: Option<u64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// `VmHWM` from `/proc/self/status`.
pub fn peak_memory_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Live manifest plus the clocks behind its timings.
pub struct ManifestWriter {
    pub manifest: RunManifest,
    path: PathBuf,
    start: Instant,
    phase_start: Instant,
}

impl ManifestWriter {
    /// Creates the output directory and writes the initial manifest.
    pub fn start(
        command: &str,
        config_hash: String,
        inputs: Vec<PathBuf>,
        output_dir: &Path,
        calibration: Option<CalibrationRecord>,
    ) -> CliResult<Self> {
        std::fs::create_dir_all(output_dir)?;
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash,
            inputs,
            output_dir: output_dir.to_path_buf(),
            calibration,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix,
            status: "running".into(),
            exit_code: None,
            warnings: Vec::new(),
            phases: Vec::new(),
            wall_clock_seconds: None,
            peak_memory_kib: None,
        };
        let now = Instant::now();
        let w = ManifestWriter {
            manifest,
            path: output_dir.join(MANIFEST_FILE),
            start: now,
            phase_start: now,
        };
        w.write()?;
        Ok(w)
    }

    /// Closes the current phase under `name` and rewrites the file.
    pub fn phase(&mut self, name: &str) -> CliResult<()> {
        let now = Instant::now();
        self.manifest.phases.push(Phase {
            name: name.to_string(),
            seconds: (now - self.phase_start).as_secs_f64(),
        });
        self.phase_start = now;
        self.write()
    }

    /// Records a warning; logging is left to the caller.
    pub fn warn(&mut self, msg: impl Into<String>) {
        self.manifest.warnings.push(msg.into());
    }

    pub fn finish(&mut self, status: &str, exit_code: i32) -> CliResult<()> {
        self.manifest.status = status.to_string();
        self.manifest.exit_code = Some(exit_code);
        self.manifest.wall_clock_seconds = Some(self.start.elapsed().as_secs_f64());
        self.manifest.peak_memory_kib = peak_memory_kib();
        self.write()
    }

    fn write(&self) -> CliResult<()> {
        std::fs::write(&self.path, serde_json::to_string_pretty(&self.manifest)? + "\n")?;
        Ok(())
    }
}
