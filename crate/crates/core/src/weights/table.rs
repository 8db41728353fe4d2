use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{all_weights, WeightName, WEIGHT_TOL};
use crate::error::{OscError, Result};

/// Weights on a geometric time grid with log–log cubic Hermite lookup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub times: Vec<f64>,
    /// `columns[i]` holds [`WeightName::ALL`]`[i]` at every time.
    pub columns: Vec<Vec<f64>>,
    pub quadrature_tol: f64,
}

impl WeightTable {
    pub fn build(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) || points < 4 {
            return Err(OscError::InvalidParameter("bad weight-table grid".into()));
        }
        let (a, b) = (t_min.ln(), t_max.ln());
        let times: Vec<f64> = (0..points)
            .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
            .collect();
        let rows = times
            .par_iter()
            .map(|&t| all_weights(t))
            .collect::<Result<Vec<_>>>()?;
        let columns = (0..9).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
        Ok(WeightTable {
            times,
            columns,
            quadrature_tol: WEIGHT_TOL,
        })
    }

    /// Default grid: `[1e-6, t_max]`, 241 points.
    pub fn default_grid(t_max: f64) -> Result<Self> {
        Self::build(1e-6, t_max, 241)
    }

    pub fn column(&self, name: WeightName) -> &[f64] {
        let i = WeightName::ALL.iter().position(|w| *w == name).expect("known weight");
        &self.columns[i]
    }

    /// Cubic Hermite interpolation of `ln w` against `ln t`.
    pub fn interpolate(&self, name: WeightName, t: f64) -> Result<f64> {
        let (lo, hi) = (self.times[0], *self.times.last().expect("nonempty"));
        if !(t >= lo && t <= hi) {
            return Err(OscError::InvalidParameter(format!("t = {t} outside table [{lo}, {hi}]")));
        }
        let xs: Vec<f64> = self.times.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = self.column(name).iter().map(|v| v.ln()).collect();
        let x = t.ln();
        let n = xs.len();
        let i = match xs.partition_point(|&v| v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let slope = |j: usize| -> f64 {
            if j == 0 {
                (ys[1] - ys[0]) / (xs[1] - xs[0])
            } else if j == n - 1 {
                (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2])
            } else {
                (ys[j + 1] - ys[j - 1]) / (xs[j + 1] - xs[j - 1])
            }
        };
        let h = xs[i + 1] - xs[i];
        let u = (x - xs[i]) / h;
        let (h00, h10, h01, h11) = (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        );
        let y = h00 * ys[i] + h10 * h * slope(i) + h01 * ys[i + 1] + h11 * h * slope(i + 1);
        Ok(y.exp())
    }

    pub fn csv_header() -> String {
        let mut h = String::from("t");
        for w in WeightName::ALL {
            h.push(',');
            h.push_str(w.label());
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header();
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t:.16e}"));
            for c in &self.columns {
                out.push_str(&format!(",{:.16e}", c[i]));
            }
            out.push('\n');
        }
        out
    }
}
