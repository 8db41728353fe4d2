//! Time weights `φ₁, φ₂, ψ₁…ψ₅, Ψ₁, Ψ₂`, the shift constraint and the
//! existence horizons.

pub mod horizons;
pub mod table;

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};
use crate::semigroup::quadrature::singular_integral;

pub use horizons::{
    closed_form_tstar, horizon_tomega, horizon_tstar, omega_lhs, tstar_lhs, Horizon, HorizonInput,
    Saturation, BISECTION_MAX_ITER, T_MAX, T_MIN,
};
pub use table::WeightTable;

/// Relative tolerance requested from the weight quadratures.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightName {
    Phi1,
    Phi2,
    Psi1,
    Psi2,
    Psi3,
    Psi4,
    Psi5,
    BigPsi1,
    BigPsi2,
}

impl WeightName {
    pub const ALL: [WeightName; 9] = [
        WeightName::Phi1,
        WeightName::Phi2,
        WeightName::Psi1,
        WeightName::Psi2,
        WeightName::Psi3,
        WeightName::Psi4,
        WeightName::Psi5,
        WeightName::BigPsi1,
        WeightName::BigPsi2,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            WeightName::Phi1 => "phi1",
            WeightName::Phi2 => "phi2",
            WeightName::Psi1 => "psi1",
            WeightName::Psi2 => "psi2",
            WeightName::Psi3 => "psi3",
            WeightName::Psi4 => "psi4",
            WeightName::Psi5 => "psi5",
            WeightName::BigPsi1 => "Psi1",
            WeightName::BigPsi2 => "Psi2",
        }
    }
}

impl fmt::Display for WeightName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for WeightName {
    type Err = OscError;

    fn from_str(s: &str) -> Result<Self> {
        WeightName::ALL
            .into_iter()
            .find(|w| w.label() == s)
            .ok_or_else(|| OscError::InvalidParameter(format!("unknown weight '{s}'")))
    }
}

/// `ln(e + 1/t)`, i.e. `1/φ₁(t)`.
pub fn log_weight(t: f64) -> f64 {
    (E + 1.0 / t).ln()
}

/// `φ₁(t) = 1/ln(e + 1/t)`, extended by `φ₁(0) = 0`.
pub fn phi1(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        1.0 / log_weight(t)
    }
}

/// `φ₂(t) = t^{1/2}`.
pub fn phi2(t: f64) -> f64 {
    t.max(0.0).sqrt()
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(OscError::InvalidParameter(format!("weights need t > 0, got {t}")));
    }
    Ok(())
}

pub fn psi1(t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(singular_integral(t, 0.0, 0.0, WEIGHT_TOL, |_, r| log_weight(r))? / t)
}

/// `t^{1/2}ψ₂(t) = ∫₀ᵗ r^{-1/2} ln(e+1/r) dr`.
pub fn sqrt_t_psi2(t: f64) -> Result<f64> {
    check_time(t)?;
    singular_integral(t, -0.5, 0.0, WEIGHT_TOL, |s, _| log_weight(s))
}

pub fn psi2(t: f64) -> Result<f64> {
    Ok(sqrt_t_psi2(t)? / t.sqrt())
}

pub fn psi3(t: f64) -> Result<f64> {
    Ok(phi1(t) * psi1(t)?)
}

pub fn psi4(t: f64) -> Result<f64> {
    check_time(t)?;
    let i = singular_integral(t, 0.0, -0.5, WEIGHT_TOL, |s, _| log_weight(s).powi(2))?;
    Ok(phi1(t) * i / t.sqrt())
}

pub fn psi5(t: f64) -> Result<f64> {
    check_time(t)?;
    singular_integral(t, -0.5, -0.5, WEIGHT_TOL, |s, _| log_weight(s))
}

/// All nine weights at one time, in [`WeightName::ALL`] order.
pub fn all_weights(t: f64) -> Result<[f64; 9]> {
    let p1 = psi1(t)?;
    let p2 = psi2(t)?;
    let p4 = psi4(t)?;
    let p5 = psi5(t)?;
    let f1 = phi1(t);
    let p3 = f1 * p1;
    let big1 = 1f64.max(p1).max(p3);
    let big2 = p2.max(p4).max(p5).max(f1 * p2).max(p4 / f1);
    Ok([f1, phi2(t), p1, p2, p3, p4, p5, big1, big2])
}

pub fn weight(name: WeightName, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(match name {
        WeightName::Phi1 => phi1(t),
        WeightName::Phi2 => phi2(t),
        WeightName::Psi1 => psi1(t)?,
        WeightName::Psi2 => psi2(t)?,
        WeightName::Psi3 => psi3(t)?,
        WeightName::Psi4 => psi4(t)?,
        WeightName::Psi5 => psi5(t)?,
        WeightName::BigPsi1 => all_weights(t)?[7],
        WeightName::BigPsi2 => all_weights(t)?[8],
    })
}

/// `Φ₁(r) = max{1, ln(e + r)}`.
pub fn big_phi1(r: f64) -> f64 {
    1f64.max((E + r.max(0.0)).ln())
}

/// `Φ₂(t) = min{1, 1/ψ₂(t)}`.
pub fn big_phi2(t: f64) -> Result<f64> {
    Ok(1f64.min(1.0 / psi2(t)?))
}

/// Largest `|α|` with `C|α|t^{1/2}ψ₂(t) < 1/2` on `(0, T)`. The left side
/// increases in `t`, so the sup sits at `T`.
pub fn shift_bound(t_horizon: f64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(OscError::InvalidParameter(format!("constant must be positive, got {c}")));
    }
    Ok(1.0 / (2.0 * c * sqrt_t_psi2(t_horizon)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::quadrature::tests::tanh_sinh;

    #[test]
    fn closed_forms() {
        assert!((phi1(1.0) - 1.0 / (E + 1.0).ln()).abs() < 1e-15);
        assert_eq!(phi2(4.0), 2.0);
        assert!(weight(WeightName::Psi1, 0.0).is_err());
        assert!(weight(WeightName::Psi2, -1.0).is_err());
    }

    #[test]
    fn psi1_matches_antiderivative() {
        for t in [1e-5, 0.01, 0.5, 3.0] {
            let exact = ((1.0 + E * t) * (1.0 + E * t).ln() / E - t * t.ln()) / t;
            assert!(((psi1(t).unwrap() - exact) / exact).abs() < 1e-10);
        }
    }

    #[test]
    fn psi_family_matches_tanh_sinh_oracle() {
        for i in 0..20 {
            let t = 10f64.powf(-5.0 + 6.0 * i as f64 / 19.0);
            let o2 = tanh_sinh(t, |_, r| r.powf(-0.5) * log_weight(r)) / t.sqrt();
            let o4 = phi1(t) * tanh_sinh(t, |s, r| r.powf(-0.5) * log_weight(s).powi(2)) / t.sqrt();
            let o5 = tanh_sinh(t, |s, r| (s * r).powf(-0.5) * log_weight(s));
            for (ours, oracle) in [(psi2(t).unwrap(), o2), (psi4(t).unwrap(), o4), (psi5(t).unwrap(), o5)] {
                assert!(((ours - oracle) / oracle).abs() < 1e-6, "t={t}: {ours} vs {oracle}");
            }
        }
    }

    #[test]
    fn big_psi1_at_least_one() {
        for i in 0..30 {
            let t = 10f64.powf(-6.0 + 9.0 * i as f64 / 29.0);
            assert!(weight(WeightName::BigPsi1, t).unwrap() >= 1.0);
        }
    }

    #[test]
    fn shift_bound_scaling() {
        let a = shift_bound(1.0, 1.0).unwrap();
        let b = shift_bound(1.0, 2.0).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-14 * a);
        assert!((a - 1.0 / (2.0 * psi2(1.0).unwrap())).abs() < 1e-14);
        let mut prev = f64::INFINITY;
        for t in [1e-6, 1e-3, 0.1, 1.0, 10.0] {
            let s = shift_bound(t, 1.0).unwrap();
            assert!(s <= prev);
            prev = s;
        }
    }

    #[test]
    fn names_parse() {
        for w in WeightName::ALL {
            assert_eq!(w.label().parse::<WeightName>().unwrap(), w);
        }
        assert!("psi9".parse::<WeightName>().is_err());
    }
}
