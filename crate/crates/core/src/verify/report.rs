use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Below this (relative to the member's scale) a norm counts as zero.
pub const DEGENERATE: f64 = 1e-10;
/// Allowed relative change of a maximum ratio between `N` and `2N`.
pub const RESOLUTION_TOL: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub member: String,
    pub t: f64,
    pub param: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Named side condition of a report (cancellation residual, domination
/// defect, resolution drift); passes when `value ≤ limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.limit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub id: String,
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
    /// Rows dropped because the right side vanished.
    pub skipped: usize,
    pub frozen: Option<f64>,
    pub checks: Vec<Check>,
    /// Fitted quantities worth recording (best exponent, constants).
    pub notes: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(id: impl Into<String>) -> Self {
        BoundReport {
            id: id.into(),
            rows: Vec::new(),
            max_ratio: 0.0,
            skipped: 0,
            frozen: None,
            checks: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    /// Records `lhs/rhs`. A vanishing left side gives ratio 0; a vanishing
    /// right side with nonzero left side is skipped and counted.
    pub fn push(&mut self, member: &str, t: f64, param: impl Into<String>, lhs: f64, rhs: f64, scale: f64) {
        let tiny = DEGENERATE * scale.max(f64::MIN_POSITIVE);
        let ratio = if lhs <= tiny {
            0.0
        } else if rhs <= tiny {
            self.skipped += 1;
            return;
        } else {
            lhs / rhs
        };
        self.max_ratio = self.max_ratio.max(ratio);
        self.rows.push(RatioRow {
            member: member.to_string(),
            t,
            param: param.into(),
            lhs,
            rhs,
            ratio,
        });
    }

    pub fn merge(&mut self, other: BoundReport) {
        self.max_ratio = self.max_ratio.max(other.max_ratio);
        self.skipped += other.skipped;
        self.rows.extend(other.rows);
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().all(|r| r.ratio.is_finite()) && self.max_ratio.is_finite()
    }

    pub fn argmax(&self) -> Option<&RatioRow> {
        self.rows.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio))
    }

    /// Frozen constant met (when present), every check passed, all finite.
    pub fn passed(&self, regression_factor: f64) -> bool {
        let within = self.frozen.map_or(true, |c| self.max_ratio <= c * regression_factor);
        within && self.all_finite() && self.checks.iter().all(Check::passed)
    }

    /// Drift between this report and the same bound on the refined grid.
    pub fn add_resolution_check(&mut self, refined_max: f64) {
        let drift = if self.max_ratio > 0.0 {
            (refined_max / self.max_ratio - 1.0).abs()
        } else if refined_max > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        self.notes.insert("max_ratio_2n".into(), refined_max);
        self.checks.push(Check::new("resolution_drift", drift, RESOLUTION_TOL));
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("member,t,param,lhs,rhs,ratio\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
                r.member, r.t, r.param, r.lhs, r.rhs, r.ratio
            ));
        }
        s
    }

    pub fn summary_line(&self, regression_factor: f64) -> String {
        let frozen = self.frozen.map_or("-".to_string(), |c| format!("{c:.6e}"));
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
        format!(
            "{} {}: max ratio {:.6e}, frozen {}, rows {}{}",
            if self.passed(regression_factor) { "PASS" } else { "FAIL" },
            self.id,
            self.max_ratio,
            frozen,
            self.rows.len(),
            if failed.is_empty() { String::new() } else { format!(", failed checks: {}", failed.join(" ")) }
        )
    }

    /// Writes `<dir>/<id>.csv`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", self.id)), self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rows_and_skips() {
        let mut r = BoundReport::new("x");
        r.push("a", 0.0, "", 0.0, 0.0, 1.0);
        r.push("b", 0.0, "", 1.0, 0.0, 1.0);
        r.push("c", 0.0, "", 2.0, 4.0, 1.0);
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.skipped, 1);
        assert_eq!(r.max_ratio, 0.5);
        assert_eq!(r.rows[0].ratio, 0.0);
        r.frozen = Some(0.48);
        assert!(r.passed(1.05));
        r.frozen = Some(0.47);
        assert!(!r.passed(1.05));
    }

    #[test]
    fn resolution_drift() {
        let mut r = BoundReport::new("x");
        r.push("a", 0.0, "", 1.0, 1.0, 1.0);
        r.add_resolution_check(1.08);
        assert!(r.passed(1.05));
        r.add_resolution_check(1.2);
        assert!(!r.passed(1.05));
        assert_eq!(r.to_csv().lines().count(), 2);
    }
}
