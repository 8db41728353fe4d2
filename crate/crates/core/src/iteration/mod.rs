//! Complexified Picard iteration for the velocity and the vorticity
//! formulations along the shifted path `y = αt`.

pub mod config;
mod forcing;
mod integrator;
pub mod monitors;
pub mod sources;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::error::{OscError, Result};
use crate::semigroup::{curl, divergence_defect, gauss_legendre};
use crate::spaces::{bmo_norm, linf_norm, lp_norm};
use crate::spectral::{ComplexPair, SpectralField};
use crate::weights::horizons::{horizon_tomega, horizon_tstar, omega_lhs, Horizon, HorizonInput};
use crate::weights::{all_weights, shift_bound};

pub use config::{DataPiece, ForcingSpec, IterationConfig, Mode, Partner, TimeGridSpec, TrigTerm};
pub use forcing::Forcing;
pub use monitors::{FieldNorms, Monitors};

use integrator::{march, propagate, ModalRates};
use monitors::{weighted_difference, MonitorAccumulator};

/// Any monitor above this is treated as blow-up.
pub const BLOW_UP: f64 = 1e6;
/// Successive-difference ratio counted as contraction.
pub const CONTRACTION_RATIO: f64 = 0.9;
/// Default number of residual probe times.
pub const RESIDUAL_PROBES: usize = 8;
const RESIDUAL_NODES: usize = 4;

/// One iterate on the snapshot grid together with its history.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub n: usize,
    pub mode: Mode,
    pub times: Vec<f64>,
    /// `(U, V)` or `(W, Z)` at every snapshot.
    pub fields: Vec<ComplexPair>,
    pub monitors: Vec<Monitors>,
    /// `differences[n − 1]` compares iterates `n` and `n − 1`.
    pub differences: Vec<f64>,
    /// Largest `‖U‖_∞/(‖W‖_∞ + ‖W‖_{L^p})` over all iterates (vorticity mode).
    pub velocity_ratio: f64,
    /// Largest relative divergence of any velocity iterate.
    pub divergence_defect: f64,
    /// Largest gap between the pressure and projection forms seen.
    pub leray_gap: f64,
}

impl IterationState {
    pub fn last_difference(&self) -> Option<f64> {
        self.differences.last().copied()
    }

    /// Snapshot index of `t` (exact match within 1e−12 relative).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1e-300))
    }

    /// Largest `‖im‖_∞` over all snapshots.
    pub fn imaginary_sup(&self) -> f64 {
        self.fields.iter().map(|p| linf_norm(&p.im)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub t: f64,
    pub re: f64,
    pub im: f64,
}

/// Setup quantities fixed before the first iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSetup {
    pub mode: Mode,
    pub constant: f64,
    pub alpha_norm: f64,
    pub shift_bound: f64,
    /// `‖u₀‖_bmo`, or `‖ω₀‖_bmo + ‖ω₀‖_{L^p}`.
    pub data_norm: f64,
    /// `Γ` over the snapshot times.
    pub forcing_level: f64,
    pub horizon: Horizon,
    pub horizon_exceeded: bool,
    /// `(2C T^{1/2}Ψ₂(T))^{-1}`; vorticity scheme: `(2C TΨ₁^ω(T))^{-1}`,
    /// or `(2C T^{1/2}Ψ₂^ω(T))^{-1}` when `p = 1`.
    pub monitor_bound: f64,
    pub snapshots: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub setup: RunSetup,
    pub converged: bool,
    pub iterations: usize,
    pub monitors: Vec<Monitors>,
    pub differences: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub contracting: bool,
    pub monitor_bound_holds: bool,
    pub residuals: Vec<ResidualRow>,
    pub max_residual: f64,
    pub max_imaginary: f64,
    pub divergence_defect: f64,
    pub leray_gap: f64,
    /// Vorticity mode: measured ratio and whether it stays within the
    /// calibrated constant.
    pub velocity_ratio: Option<f64>,
    pub velocity_ratio_within: Option<bool>,
}

/// Prepared run: snapshot grid, initial data, forcing samples and constants.
pub struct Iteration {
    config: IterationConfig,
    calibration: Calibration,
    times: Vec<f64>,
    rates: ModalRates,
    forcing: Forcing,
    forcing_samples: Option<Vec<ComplexPair>>,
    initial: ComplexPair,
    setup: RunSetup,
}

impl Iteration {
    pub fn new(config: &IterationConfig, calibration: &Calibration) -> Result<Self> {
        config.validate_shape()?;
        let constant = config.constant.unwrap_or(calibration.iteration_constant);
        let grid = config.grid;
        let alpha = config.alpha();
        let bound = shift_bound(config.horizon, constant)?;
        let alpha_norm = config.alpha_norm();
        if alpha_norm > bound {
            return Err(OscError::Config(format!(
                "|α| = {alpha_norm:.6e} exceeds the shift bound {bound:.6e} required by C|α|T^{{1/2}}ψ₂(T) < 1/2 (C = {constant}, T = {})",
                config.horizon
            )));
        }
        let times = config.times()?;
        let forcing = Forcing::new(grid, &config.forcing, &alpha)?;
        let u0 = config.initial_velocity()?;
        let (initial_re, data_norm) = match config.mode {
            Mode::Velocity => {
                let n = bmo_norm(&u0, true)?;
                (u0, n)
            }
            Mode::Vorticity => {
                let w0 = curl(&u0)?;
                let n = bmo_norm(&w0, true)? + lp_norm(&w0, config.p)?;
                (w0, n)
            }
        };
        let d = grid.dim();
        let initial = ComplexPair::new(initial_re, SpectralField::zeros(grid, d, true))?;
        let forcing_level = forcing.level(&times)?;
        let forcing_samples = if forcing.is_zero() {
            None
        } else {
            Some(
                times
                    .iter()
                    .map(|&t| match config.mode {
                        Mode::Velocity => Ok(forcing.at(t)),
                        Mode::Vorticity => forcing.curl_at(t),
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        let horizon = match config.mode {
            Mode::Velocity => horizon_tstar(&HorizonInput::velocity(data_norm, forcing_level, constant))?,
            Mode::Vorticity => horizon_tomega(&HorizonInput::vorticity(data_norm, forcing_level, constant, config.p))?,
        };
        let mut warnings = Vec::new();
        let horizon_exceeded = config.horizon > horizon.t;
        if horizon_exceeded {
            let msg = format!(
                "horizon T = {} exceeds the guaranteed existence time {:.6e} for data norm {data_norm:.6e}",
                config.horizon, horizon.t
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let lhs = match config.mode {
            Mode::Velocity => config.horizon.sqrt() * all_weights(config.horizon)?[8],
            Mode::Vorticity => omega_lhs(config.horizon, config.p)?,
        };
        let monitor_bound = 1.0 / (2.0 * constant * lhs);
        let setup = RunSetup {
            mode: config.mode,
            constant,
            alpha_norm,
            shift_bound: bound,
            data_norm,
            forcing_level,
            horizon,
            horizon_exceeded,
            monitor_bound,
            snapshots: times.len(),
            warnings,
        };
        Ok(Iteration {
            config: config.clone(),
            calibration: calibration.clone(),
            rates: ModalRates::new(&grid, &alpha),
            times,
            forcing,
            forcing_samples,
            initial,
            setup,
        })
    }

    pub fn setup(&self) -> &RunSetup {
        &self.setup
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn initial(&self) -> &ComplexPair {
        &self.initial
    }

    fn forcing_at(&self, t: f64) -> Result<ComplexPair> {
        match self.config.mode {
            Mode::Velocity => Ok(self.forcing.at(t)),
            Mode::Vorticity => self.forcing.curl_at(t),
        }
    }

    fn nonlinearity(&self, pair: &ComplexPair) -> Result<ComplexPair> {
        match self.config.mode {
            Mode::Velocity => sources::velocity_nonlinearity(pair),
            Mode::Vorticity => sources::vorticity_nonlinearity(pair),
        }
    }

    fn with_forcing(&self, mut s: ComplexPair, j: usize) -> Result<ComplexPair> {
        if let Some(f) = &self.forcing_samples {
            s.re = s.re.add(&f[j].re)?;
            s.im = s.im.add(&f[j].im)?;
        }
        Ok(s)
    }

    fn finish_state(&self, n: usize, fields: Vec<ComplexPair>, previous: Option<&IterationState>, leray_gap: f64) -> Result<IterationState> {
        let mode = self.config.mode;
        let p = self.config.p;
        let per_snapshot = fields
            .par_iter()
            .map(|pair| {
                let re = FieldNorms::compute(&pair.re, mode, p)?;
                let im = FieldNorms::compute(&pair.im, mode, p)?;
                let extra = match mode {
                    Mode::Velocity => {
                        let defect = divergence_defect(&pair.re)?.max(divergence_defect(&pair.im)?);
                        (defect, [0.0; 2])
                    }
                    Mode::Vorticity => {
                        let v = sources::recovered_velocity(pair)?;
                        (0.0, [linf_norm(&v.re), linf_norm(&v.im)])
                    }
                };
                Ok((re, im, extra))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut acc = MonitorAccumulator::default();
        let mut defect: f64 = 0.0;
        for (&t, (re, im, (def, vel))) in self.times.iter().zip(&per_snapshot) {
            acc.add(t, [re, im], mode);
            defect = defect.max(*def);
            if mode == Mode::Vorticity {
                acc.add_velocity(t, *vel, [re, im]);
            }
        }
        let monitors_now = acc.finish(n, mode);
        if !monitors_now.all_finite() || monitors_now.max > BLOW_UP {
            return Err(OscError::Divergence {
                iterate: n,
                detail: format!("monitor maximum {:.6e} beyond {BLOW_UP:.0e}", monitors_now.max),
            });
        }
        let (mut monitors, mut differences, mut velocity_ratio, mut div, mut gap) = match previous {
            Some(s) => (s.monitors.clone(), s.differences.clone(), s.velocity_ratio, s.divergence_defect, s.leray_gap),
            None => (Vec::new(), Vec::new(), 0.0, 0.0, 0.0),
        };
        monitors.push(monitors_now);
        if let Some(prev) = previous {
            differences.push(weighted_difference(&self.times, &fields, &prev.fields)?);
        }
        velocity_ratio = velocity_ratio.max(acc.velocity_ratio);
        div = div.max(defect);
        gap = gap.max(leray_gap);
        Ok(IterationState {
            n,
            mode,
            times: self.times.clone(),
            fields,
            monitors,
            differences,
            velocity_ratio,
            divergence_defect: div,
            leray_gap: gap,
        })
    }

    /// Iterate 0: the linear problem driven by the forcing alone.
    pub fn init(&self) -> Result<IterationState> {
        let g = *self.initial.grid();
        let d = g.dim();
        let sources: Vec<ComplexPair> = match &self.forcing_samples {
            Some(f) => f.clone(),
            None => vec![ComplexPair::zeros(g, d); self.times.len()],
        };
        let fields = march(&self.initial, &sources, &self.times, &self.rates)?;
        self.finish_state(0, fields, None, 0.0)
    }

    /// Iterate `n + 1` from iterate `n`.
    pub fn step(&self, state: &IterationState) -> Result<IterationState> {
        let n = state.n + 1;
        let sources = state
            .fields
            .par_iter()
            .enumerate()
            .map(|(j, pair)| self.with_forcing(self.nonlinearity(pair)?, j))
            .collect::<Result<Vec<_>>>()?;
        let mut gap = 0.0;
        if self.config.mode == Mode::Velocity && self.times.len() > 1 {
            // spot check on one snapshot per step, rotating through the grid
            let j = 1 + (n * 7919) % (self.times.len() - 1);
            gap = sources::check_leray(&state.fields[j]).map_err(|e| match e {
                OscError::Divergence { detail, .. } => OscError::Divergence { iterate: n, detail },
                other => other,
            })?;
        }
        let fields = march(&self.initial, &sources, &self.times, &self.rates)?;
        self.finish_state(n, fields, Some(state), gap)
    }

    /// Residual of the mild equation at the probe times, with the Duhamel
    /// integral recomputed by Gauss–Legendre on every snapshot interval from
    /// sources of the linearly interpolated iterate.
    pub fn residuals(&self, state: &IterationState) -> Result<Vec<ResidualRow>> {
        let probes = self.residual_probe_times();
        let (x, w) = gauss_legendre(RESIDUAL_NODES);
        let mut acc: Vec<ComplexPair> = probes.iter().map(|&t| propagate(&self.initial, t, &self.rates)).collect();
        let last = *probes.last().unwrap_or(&0.0);
        for j in 0..self.times.len() - 1 {
            let (a, b) = (self.times[j], self.times[j + 1]);
            if a >= last {
                break;
            }
            let h = b - a;
            let nodes: Vec<(f64, f64)> = x.iter().zip(&w).map(|(xi, wi)| (a + 0.5 * h * (1.0 + xi), 0.5 * h * wi)).collect();
            let node_sources = nodes
                .par_iter()
                .map(|&(s, _)| {
                    let lam = (s - a) / h;
                    let re = state.fields[j].re.scale(1.0 - lam).axpy(lam, &state.fields[j + 1].re)?;
                    let im = state.fields[j].im.scale(1.0 - lam).axpy(lam, &state.fields[j + 1].im)?;
                    let mut src = self.nonlinearity(&ComplexPair::new(re, im)?)?;
                    if !self.forcing.is_zero() {
                        let f = self.forcing_at(s)?;
                        src = ComplexPair::new(src.re.add(&f.re)?, src.im.add(&f.im)?)?;
                    }
                    Ok(src)
                })
                .collect::<Result<Vec<_>>>()?;
            for (k, &t) in probes.iter().enumerate() {
                if t < b * (1.0 - 1e-12) {
                    continue;
                }
                for (src, &(s, wt)) in node_sources.iter().zip(&nodes) {
                    let term = propagate(src, t - s, &self.rates);
                    acc[k].re = acc[k].re.axpy(wt, &term.re)?;
                    acc[k].im = acc[k].im.axpy(wt, &term.im)?;
                }
            }
        }
        probes
            .iter()
            .zip(&acc)
            .map(|(&t, rhs)| {
                let j = state
                    .index_of(t)
                    .ok_or_else(|| OscError::InvalidParameter(format!("probe {t} is not a snapshot")))?;
                Ok(ResidualRow {
                    t,
                    re: linf_norm(&state.fields[j].re.sub(&rhs.re)?),
                    im: linf_norm(&state.fields[j].im.sub(&rhs.im)?),
                })
            })
            .collect()
    }

    /// Configured probe times, or eight snapshot times spread over the grid.
    pub fn residual_probe_times(&self) -> Vec<f64> {
        if !self.config.probe_times.is_empty() {
            let mut p = self.config.probe_times.clone();
            p.sort_by(|a, b| a.total_cmp(b));
            return p;
        }
        let m = self.times.len() - 1;
        let mut idx: Vec<usize> = (1..=RESIDUAL_PROBES).map(|k| (k * m).div_ceil(RESIDUAL_PROBES)).collect();
        idx.dedup();
        idx.into_iter().map(|i| self.times[i]).collect()
    }

    /// Iterates to convergence or `max_iterations`, calling `observer` on
    /// every iterate (including iterate 0).
    pub fn run_observed(&self, observer: &mut dyn FnMut(&IterationState)) -> Result<(IterationState, ConvergenceReport)> {
        let mut state = self.init()?;
        observer(&state);
        let mut converged = false;
        while state.n < self.config.max_iterations {
            state = self.step(&state)?;
            observer(&state);
            log::info!(
                "iterate {}: monitor max {:.6e}, difference {:.6e}",
                state.n,
                state.monitors.last().map_or(0.0, |m| m.max),
                state.last_difference().unwrap_or(f64::NAN)
            );
            if state.last_difference().is_some_and(|d| d <= self.config.tolerance) {
                converged = true;
                break;
            }
        }
        let report = self.report(&state, converged)?;
        Ok((state, report))
    }

    pub fn run(&self) -> Result<(IterationState, ConvergenceReport)> {
        self.run_observed(&mut |_| {})
    }

    fn report(&self, state: &IterationState, converged: bool) -> Result<ConvergenceReport> {
        let contraction_ratios: Vec<f64> = state
            .differences
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect();
        let contracting = converged || contraction_ratios.last().is_some_and(|&r| r <= CONTRACTION_RATIO);
        let residuals = self.residuals(state)?;
        let max_residual = residuals.iter().map(|r| r.re + r.im).fold(0.0, f64::max);
        let sup_monitor = state.monitors.iter().map(|m| m.max).fold(0.0, f64::max);
        let (velocity_ratio, velocity_ratio_within) = match self.config.mode {
            Mode::Velocity => (None, None),
            Mode::Vorticity => (
                Some(state.velocity_ratio),
                Some(state.velocity_ratio <= self.calibration.biot_savart_constant),
            ),
        };
        Ok(ConvergenceReport {
            setup: self.setup.clone(),
            converged,
            iterations: state.n,
            monitors: state.monitors.clone(),
            differences: state.differences.clone(),
            contraction_ratios,
            contracting,
            monitor_bound_holds: sup_monitor <= self.setup.monitor_bound,
            residuals,
            max_residual,
            max_imaginary: state.imaginary_sup(),
            divergence_defect: state.divergence_defect,
            leray_gap: state.leray_gap,
            velocity_ratio,
            velocity_ratio_within,
        })
    }
}

fn check_mode(config: &IterationConfig, mode: Mode) -> Result<()> {
    if config.mode != mode {
        return Err(OscError::Config(format!("configuration is for the {:?} scheme", config.mode)));
    }
    Ok(())
}

/// Iterate 0 of the configured scheme with the embedded calibration.
pub fn init_iterate(config: &IterationConfig) -> Result<IterationState> {
    Iteration::new(config, &Calibration::embedded())?.init()
}

/// One Picard step with the embedded calibration.
pub fn step_iterate(state: &IterationState, config: &IterationConfig) -> Result<IterationState> {
    Iteration::new(config, &Calibration::embedded())?.step(state)
}

/// Velocity scheme to convergence.
pub fn run_iteration(config: &IterationConfig) -> Result<(IterationState, ConvergenceReport)> {
    check_mode(config, Mode::Velocity)?;
    Iteration::new(config, &Calibration::embedded())?.run()
}

/// Vorticity scheme to convergence.
pub fn run_vorticity(config: &IterationConfig) -> Result<(IterationState, ConvergenceReport)> {
    check_mode(config, Mode::Vorticity)?;
    Iteration::new(config, &Calibration::embedded())?.run()
}

#[cfg(test)]
mod tests;
