use serde::{Deserialize, Serialize};

use super::{all_weights, big_phi1, log_weight, WEIGHT_TOL};
use crate::error::{OscError, Result};
use crate::semigroup::quadrature::singular_integral;

pub const T_MIN: f64 = 1e-8;
pub const T_MAX: f64 = 1e3;
pub const BISECTION_MAX_ITER: usize = 200;

/// Data entering a horizon computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonInput {
    /// `‖u₀‖_bmo`, or `‖ω₀‖_bmo + ‖ω₀‖_{L^p}` for the vorticity horizon.
    pub data_norm: f64,
    /// Forcing level `Γ`.
    pub forcing_level: f64,
    /// Iteration constant `C`.
    pub constant: f64,
    /// Integrability exponent (vorticity horizon only).
    pub p: Option<f64>,
}

impl HorizonInput {
    pub fn velocity(data_norm: f64, forcing_level: f64, constant: f64) -> Self {
        HorizonInput {
            data_norm,
            forcing_level,
            constant,
            p: None,
        }
    }

    pub fn vorticity(data_norm: f64, forcing_level: f64, constant: f64, p: f64) -> Self {
        HorizonInput {
            data_norm,
            forcing_level,
            constant,
            p: Some(p),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.data_norm >= 0.0 && self.data_norm.is_finite()) {
            return Err(OscError::InvalidParameter("data norm must be finite and ≥ 0".into()));
        }
        if !(self.forcing_level >= 0.0 && self.forcing_level.is_finite()) {
            return Err(OscError::InvalidParameter("forcing level must be finite and ≥ 0".into()));
        }
        if !(self.constant > 0.0 && self.constant.is_finite()) {
            return Err(OscError::InvalidParameter("constant must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Saturation {
    Interior,
    /// No crossing below `T_MAX`; the horizon is reported as `T_MAX`.
    SaturatedHigh,
    /// The inequality already fails at `T_MIN`.
    SaturatedLow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub t: f64,
    pub saturation: Saturation,
    /// `lhs(T)·C·(data + TΨ₁(T)Γ) − 1` at the returned `T` (≤ 0 when satisfied).
    pub defect: f64,
    /// Closed min-form of the horizon with the chosen `Φ₁` envelope.
    pub closed_form: f64,
    pub branch: String,
}

/// `T^{1/2}Ψ₂(T)` and `TΨ₁(T)`.
pub fn tstar_lhs(t: f64) -> Result<(f64, f64)> {
    let w = all_weights(t)?;
    Ok((t.sqrt() * w[8], t * w[7]))
}

/// `∫₀ᵗ φ₁(t−s)^{-1}(φ₁(s)^{-1} + φ₁(s)^{-2}) ds = tΨ₁^ω(t)`.
fn omega_first(t: f64) -> Result<f64> {
    singular_integral(t, 0.0, 0.0, WEIGHT_TOL, |s, r| {
        let l = log_weight(s);
        log_weight(r) * (l + l * l)
    })
}

/// Left side of the vorticity condition: `TΨ₁^ω(T)` for `p > 1`,
/// `T^{1/2}Ψ₂^ω(T)` for `p = 1`.
pub fn omega_lhs(t: f64, p: f64) -> Result<f64> {
    let first = omega_first(t)?;
    if p > 1.0 {
        return Ok(first);
    }
    let l1 = singular_integral(t, 0.0, 0.0, WEIGHT_TOL, |_, r| log_weight(r))?;
    let lp = singular_integral(t, 0.0, -0.5, WEIGHT_TOL, |s, _| log_weight(s))?;
    Ok(first.max(l1 + lp))
}

fn solve(input: &HorizonInput, lhs: impl Fn(f64) -> Result<f64>, branch: &'static str, closed_form: f64) -> Result<Horizon> {
    input.validate()?;
    let c = input.constant;
    let g = |t: f64| -> Result<f64> {
        let (_, t_psi1) = tstar_lhs(t)?;
        Ok(lhs(t)? * c * (input.data_norm + t_psi1 * input.forcing_level) - 1.0)
    };
    let g_lo = g(T_MIN)?;
    if g_lo > 0.0 {
        return Ok(Horizon { t: T_MIN, saturation: Saturation::SaturatedLow, defect: g_lo, closed_form, branch: branch.into() });
    }
    let g_hi = g(T_MAX)?;
    if g_hi <= 0.0 {
        return Ok(Horizon { t: T_MAX, saturation: Saturation::SaturatedHigh, defect: g_hi, closed_form, branch: branch.into() });
    }
    let (mut lo, mut hi) = (T_MIN.ln(), T_MAX.ln());
    let mut defect = g_lo;
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid.exp())?;
        if v <= 0.0 {
            lo = mid;
            defect = v;
        } else {
            hi = mid;
        }
    }
    Ok(Horizon { t: lo.exp(), saturation: Saturation::Interior, defect, closed_form, branch: branch.into() })
}

/// `min{1/(C a² Φ₁(a)), aΦ₁(a)/(C Φ₁(Γ))}`.
pub fn closed_form_tstar(data_norm: f64, forcing_level: f64, constant: f64) -> f64 {
    let a = data_norm;
    let first = 1.0 / (constant * a * a * big_phi1(a));
    let second = a * big_phi1(a) / (constant * big_phi1(forcing_level));
    first.min(second)
}

/// Largest `T` with `T^{1/2}Ψ₂(T) ≤ 1/(C(‖u₀‖ + TΨ₁(T)Γ))`.
pub fn horizon_tstar(input: &HorizonInput) -> Result<Horizon> {
    let closed = closed_form_tstar(input.data_norm, input.forcing_level, input.constant);
    solve(input, |t| Ok(tstar_lhs(t)?.0), "velocity", closed)
}

/// Vorticity horizon; `p ∈ [1, 3)` selects the branch.
pub fn horizon_tomega(input: &HorizonInput) -> Result<Horizon> {
    let p = input
        .p
        .ok_or_else(|| OscError::InvalidParameter("vorticity horizon needs p".into()))?;
    if !(1.0..3.0).contains(&p) {
        return Err(OscError::InvalidParameter(format!("p must lie in [1, 3), got {p}")));
    }
    let a = input.data_norm;
    let (c, gamma) = (input.constant, big_phi1(input.forcing_level));
    let m = if p > 1.0 { a * big_phi1(a) } else { (a * big_phi1(a)).powi(2) };
    let closed = (1.0 / (c * m)).min(m / (c * gamma));
    let branch = if p > 1.0 { "p>1" } else { "p=1" };
    solve(input, |t| omega_lhs(t, p), branch, closed)
}
