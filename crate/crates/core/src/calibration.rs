//! Frozen constants produced by the estimate verifier.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};

/// Calibration shipped with the crate.
pub const EMBEDDED: &str = include_str!("../calibration.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub version: u32,
    pub corpus_seed: u64,
    /// Grid size of the 2D calibration corpus.
    pub grid_n: usize,
    /// Multiplies the measured maxima behind the iteration and Biot–Savart constants.
    pub safety_factor: f64,
    /// Later runs fail when a ratio exceeds frozen × this factor.
    pub regression_factor: f64,
    /// `C` in the iteration estimates and in the shift bound.
    pub iteration_constant: f64,
    /// Constant in `‖U‖_∞ ≲ ‖W‖_∞ + ‖W‖_{L^p}`.
    pub biot_savart_constant: f64,
    /// Measured maximum ratio per bound family.
    pub bounds: BTreeMap<String, f64>,
}

impl Calibration {
    pub fn embedded() -> Self {
        Self::parse(EMBEDDED).expect("embedded calibration is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cal: Calibration =
            serde_json::from_str(text).map_err(|e| OscError::Calibration(format!("unreadable calibration: {e}")))?;
        cal.validate()?;
        Ok(cal)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(OscError::Calibration(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("safety_factor", self.safety_factor)?;
        positive("regression_factor", self.regression_factor)?;
        positive("iteration_constant", self.iteration_constant)?;
        positive("biot_savart_constant", self.biot_savart_constant)?;
        for (k, v) in &self.bounds {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(OscError::Calibration(format!("bound {k} must be finite and ≥ 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Frozen maximum for `id`.
    pub fn bound(&self, id: &str) -> Result<f64> {
        self.bounds
            .get(id)
            .copied()
            .ok_or_else(|| OscError::Calibration(format!("no frozen constant for {id}")))
    }
}
