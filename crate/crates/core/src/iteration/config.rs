use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};
use crate::semigroup::leray_project;
use crate::spectral::{dump, Grid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Velocity,
    Vorticity,
}

/// One real Fourier term `cos(k·x)·a + sin(k·x)·b` with integer frequency `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub freq: Vec<i64>,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigTerm {
    fn add_to(&self, f: &mut SpectralField) -> Result<()> {
        let g = *f.grid();
        let d = g.dim();
        if self.freq.len() != d {
            return Err(OscError::Config(format!("term frequency {:?} needs {d} entries", self.freq)));
        }
        for (name, v) in [("cos", &self.cos), ("sin", &self.sin)] {
            if !v.is_empty() && v.len() != f.components() {
                return Err(OscError::Config(format!(
                    "term {name} amplitudes need {} entries",
                    f.components()
                )));
            }
        }
        let mut k = [0i64; 3];
        k[..d].copy_from_slice(&self.freq);
        let half = (g.n() / 2) as i64;
        if k.iter().any(|v| v.abs() >= half) {
            return Err(OscError::Config(format!("term frequency {k:?} not resolved on the grid")));
        }
        let (ip, im) = (g.flat_of_freq(k), g.flat_of_freq([-k[0], -k[1], -k[2]]));
        for c in 0..f.components() {
            let a = self.cos.get(c).copied().unwrap_or(0.0);
            let b = self.sin.get(c).copied().unwrap_or(0.0);
            let coeffs = f.coeffs_mut(c);
            if ip == im {
                coeffs[ip] += Complex64::new(a, 0.0);
            } else {
                // a cos θ + b sin θ = ½(a − ib)e^{iθ} + ½(a + ib)e^{−iθ}
                coeffs[ip] += Complex64::new(0.5 * a, -0.5 * b);
                coeffs[im] += Complex64::new(0.5 * a, 0.5 * b);
            }
        }
        Ok(())
    }
}

/// Building blocks of initial data; the listed pieces are summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataPiece {
    /// `A(sin x cos y, −cos x sin y)` in 2D, `A(sin x cos y cos z, −cos x sin y cos z, 0)` in 3D.
    TaylorGreen { amplitude: f64 },
    /// Random coefficients of size `amplitude` on integer shells `k_min ≤ |k| ≤ k_max`.
    WhiteBand {
        amplitude: f64,
        k_min: f64,
        k_max: f64,
        #[serde(default)]
        seed: u64,
    },
    Modes { terms: Vec<TrigTerm> },
    /// Coefficient dump written by this crate.
    File { path: PathBuf },
}

pub fn taylor_green(grid: Grid, amplitude: f64) -> SpectralField {
    let dk = grid.dk();
    SpectralField::sample(grid, grid.dim(), |x, c| {
        let (sx, cx) = (dk * x[0]).sin_cos();
        let (sy, cy) = (dk * x[1]).sin_cos();
        let cz = if grid.dim() == 3 { (dk * x[2]).cos() } else { 1.0 };
        amplitude
            * match c {
                0 => sx * cy * cz,
                1 => -cx * sy * cz,
                _ => 0.0,
            }
    })
}

/// Real random field with independent uniform coefficients on a band.
pub fn white_band(grid: Grid, components: usize, amplitude: f64, k_min: f64, k_max: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid, components, false);
    for i in 0..grid.len() {
        let fr = grid.freq(i);
        let r = ((fr[0] * fr[0] + fr[1] * fr[1] + fr[2] * fr[2]) as f64).sqrt();
        for c in 0..components {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if r >= k_min && r <= k_max && grid.dealias_keep(i) {
                f.coeffs_mut(c)[i] = z * amplitude;
            }
        }
    }
    f.enforce_reality();
    f
}

/// Sums the pieces into a vector field on `grid` (not yet projected).
pub fn build_data(grid: Grid, pieces: &[DataPiece], seed_offset: u64) -> Result<SpectralField> {
    let d = grid.dim();
    let mut f = SpectralField::zeros(grid, d, true);
    for piece in pieces {
        let part = match piece {
            DataPiece::TaylorGreen { amplitude } => taylor_green(grid, *amplitude),
            DataPiece::WhiteBand { amplitude, k_min, k_max, seed } => {
                white_band(grid, d, *amplitude, *k_min, *k_max, seed.wrapping_add(seed_offset))
            }
            DataPiece::Modes { terms } => {
                let mut m = SpectralField::zeros(grid, d, true);
                for t in terms {
                    t.add_to(&mut m)?;
                }
                m
            }
            DataPiece::File { path } => {
                let loaded = dump::read_field(path)?;
                if loaded.grid() != &grid || loaded.components() != d {
                    return Err(OscError::Config(format!(
                        "{} does not match the configured grid",
                        path.display()
                    )));
                }
                loaded
            }
        };
        f = f.add(&part)?;
    }
    Ok(f)
}

/// How the imaginary forcing partner `g` is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Partner {
    /// `F + iG = f(x + iαt)`.
    #[default]
    Harmonic,
    /// Independent, time-independent `g`.
    Terms { terms: Vec<TrigTerm> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
    #[serde(default)]
    pub partner: Partner,
}

/// Snapshot times: `0`, then geometric from `t_min` with ratio `ratio` until
/// the spacing reaches `h_max`, then uniform up to the horizon; extra times
/// are merged in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSpec {
    pub t_min: Option<f64>,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    pub h_max: Option<f64>,
}

fn default_ratio() -> f64 {
    1.3
}

impl Default for TimeGridSpec {
    fn default() -> Self {
        TimeGridSpec {
            t_min: None,
            ratio: default_ratio(),
            h_max: None,
        }
    }
}

impl TimeGridSpec {
    pub fn build(&self, horizon: f64, extra: &[f64]) -> Result<Vec<f64>> {
        let t_min = self.t_min.unwrap_or(horizon * 1e-3);
        let h_max = self.h_max.unwrap_or(horizon / 24.0);
        if !(t_min > 0.0 && t_min < horizon && h_max > 0.0 && self.ratio > 1.0) {
            return Err(OscError::Config("time grid needs 0 < t_min < T, h_max > 0, ratio > 1".into()));
        }
        let mut times = vec![0.0, t_min];
        let mut t = t_min;
        loop {
            let step = (t * (self.ratio - 1.0)).min(h_max);
            let next = t + step;
            if next >= horizon * (1.0 - 1e-9) {
                break;
            }
            times.push(next);
            t = next;
        }
        times.push(horizon);
        for &e in extra {
            if !(e > 0.0 && e <= horizon) {
                return Err(OscError::Config(format!("probe time {e} outside (0, T]")));
            }
            times.push(e);
        }
        times.sort_by(|a, b| a.total_cmp(b));
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
        Ok(times)
    }
}

/// Full description of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationConfig {
    pub grid: Grid,
    /// Horizon `T`.
    pub horizon: f64,
    #[serde(default)]
    pub time_grid: TimeGridSpec,
    /// Shift vector `α`; zeros when omitted.
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// Initial velocity (the vorticity scheme starts from its curl).
    pub initial: Vec<DataPiece>,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Integrability exponent of the vorticity scheme.
    #[serde(default = "default_p")]
    pub p: f64,
    /// Iteration constant `C`; the calibrated value when omitted.
    #[serde(default)]
    pub constant: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Times reported in the residual check and the radius probe.
    #[serde(default)]
    pub probe_times: Vec<f64>,
}

fn default_max_iterations() -> usize {
    40
}

fn default_tolerance() -> f64 {
    1e-12
}

fn default_mode() -> Mode {
    Mode::Velocity
}

fn default_p() -> f64 {
    2.0
}

impl IterationConfig {
    pub fn alpha(&self) -> Vec<f64> {
        if self.alpha.is_empty() {
            vec![0.0; self.grid.dim()]
        } else {
            self.alpha.clone()
        }
    }

    pub fn alpha_norm(&self) -> f64 {
        self.alpha().iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.time_grid.build(self.horizon, &self.probe_times)
    }

    /// Structural checks that do not need the calibration constant.
    pub fn validate_shape(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(OscError::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.alpha().len() != self.grid.dim() {
            return Err(OscError::Config(format!(
                "alpha has {} entries, grid dimension is {}",
                self.alpha().len(),
                self.grid.dim()
            )));
        }
        if self.alpha().iter().any(|a| !a.is_finite()) {
            return Err(OscError::Config("alpha must be finite".into()));
        }
        if self.max_iterations == 0 || !(self.tolerance > 0.0) {
            return Err(OscError::Config("need max_iterations ≥ 1 and tolerance > 0".into()));
        }
        if self.mode == Mode::Vorticity {
            if self.grid.dim() != 3 {
                return Err(OscError::Config("the vorticity scheme needs d = 3".into()));
            }
            if !(1.0..3.0).contains(&self.p) {
                return Err(OscError::Config(format!("p must satisfy 1 ≤ p < 3, got {}", self.p)));
            }
        }
        if let Some(c) = self.constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(OscError::Config("constant must be positive".into()));
            }
        }
        Ok(())
    }

    /// Initial velocity: summed pieces, Leray-projected and truncated to
    /// the dealiasing box.
    pub fn initial_velocity(&self) -> Result<SpectralField> {
        let raw = build_data(self.grid, &self.initial, self.seed)?;
        Ok(leray_project(&raw)?.dealiased())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn time_grid_is_refined_near_zero_and_contains_probes() {
        let spec = TimeGridSpec::default();
        let t = spec.build(0.2, &[0.01, 0.04, 0.16]).unwrap();
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 0.2);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(t.windows(2).all(|w| w[1] - w[0] <= 0.2 / 24.0 + 1e-15));
        for p in [0.01, 0.04, 0.16] {
            assert!(t.iter().any(|&x| (x - p).abs() < 1e-15));
        }
        assert!(t[1] <= 2e-4 + 1e-18);
        assert!(spec.build(0.2, &[0.5]).is_err());
    }

    #[test]
    fn trig_terms_build_real_fields() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let piece = DataPiece::Modes {
            terms: vec![TrigTerm { freq: vec![1, 2], cos: vec![1.0, 0.0], sin: vec![0.0, 0.5] }],
        };
        let f = build_data(g, &[piece], 0).unwrap();
        assert!(f.reality_defect() < 1e-15);
        let v = f.to_real_values();
        for i in (0..g.len()).step_by(7) {
            let x = g.position(i);
            let th = x[0] + 2.0 * x[1];
            assert!((v[0][i] - th.cos()).abs() < 1e-14);
            assert!((v[1][i] - 0.5 * th.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_keys() {
        let json = r#"{"grid":{"dim":2,"n":16},"horizon":0.1,"initial":[{"kind":"taylor_green","amplitude":0.001}]}"#;
        let cfg: IterationConfig = serde_json::from_str(json).unwrap();
        cfg.validate_shape().unwrap();
        let back: IterationConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<IterationConfig>(&json.replace("horizon", "horizn")).is_err());
    }

    #[test]
    fn vorticity_needs_three_dimensions_and_p_below_three() {
        let mut cfg: IterationConfig = serde_json::from_str(
            r#"{"grid":{"dim":3,"n":8},"horizon":0.1,"initial":[],"mode":"vorticity","p":3.0}"#,
        )
        .unwrap();
        assert!(cfg.validate_shape().is_err());
        cfg.p = 1.0;
        assert!(cfg.validate_shape().is_ok());
    }
}
