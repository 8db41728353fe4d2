use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spaces::besov::besov_from_blocks;
use crate::spaces::lp::{lp_of_values, magnitudes};
use crate::spaces::{bmo_of_values, lp_decompose, BesovIndex};
use crate::spectral::{ComplexPair, SpectralField};
use crate::weights::phi1;

use super::config::Mode;

/// Norms of one real field at one time entering the monitors.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldNorms {
    pub linf: f64,
    /// `B⁰_{∞,∞}` (inhomogeneous).
    pub besov: f64,
    /// Local bmo.
    pub bmo: f64,
    /// `Ḃ¹_{∞,1}` in velocity mode, `L^p` in vorticity mode.
    pub fourth: f64,
}

impl FieldNorms {
    pub fn compute(f: &SpectralField, mode: Mode, p: f64) -> Result<Self> {
        if f.is_zero() {
            return Ok(FieldNorms::default());
        }
        let g = *f.grid();
        let vals = f.to_real_values();
        let mags = magnitudes(&vals);
        let inf = f64::INFINITY;
        let fourth = match mode {
            Mode::Velocity => besov_from_blocks(&lp_decompose(f, true), BesovIndex::new(1.0, inf, 1.0)?)?,
            Mode::Vorticity => lp_of_values(&g, &mags, p)?,
        };
        Ok(FieldNorms {
            linf: lp_of_values(&g, &mags, inf)?,
            besov: besov_from_blocks(&lp_decompose(f, false), BesovIndex::new(0.0, inf, inf)?)?,
            bmo: bmo_of_values(&g, &vals, true),
            fourth,
        })
    }
}

/// Monitor values of one iterate. Each is a sum of two suprema over the
/// snapshots, one for the real and one for the imaginary part.
///
/// Velocity mode: `L_n` (φ₁-weighted `L^∞`), `L′_n` (`B⁰_{∞,∞}`), `L″_n`
/// (bmo), `L‴_n` (`t^{1/2}Ḃ¹_{∞,1}`). Vorticity mode: `K_n, K′_n, K″_n`
/// likewise, `K‴_n` (`L^p`) and `Q_n` (φ₁-weighted `L^∞` of the recovered
/// velocities).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    pub n: usize,
    pub weighted_linf: f64,
    pub besov: f64,
    pub bmo: f64,
    pub fourth: f64,
    pub recovered_velocity: Option<f64>,
    pub max: f64,
}

impl Monitors {
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.weighted_linf, self.besov, self.bmo, self.fourth];
        v.extend(self.recovered_velocity);
        v.push(self.max);
        v
    }

    pub fn all_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Running suprema for the real and imaginary parts.
#[derive(Debug, Clone, Default)]
pub(crate) struct MonitorAccumulator {
    sup: [[f64; 4]; 2],
    velocity: [f64; 2],
    /// Largest `‖U‖_∞/(‖W‖_∞ + ‖W‖_{L^p})` seen (vorticity mode).
    pub velocity_ratio: f64,
}

impl MonitorAccumulator {
    pub fn add(&mut self, t: f64, parts: [&FieldNorms; 2], mode: Mode) {
        let w = phi1(t);
        let time_weight = match mode {
            Mode::Velocity => t.sqrt(),
            Mode::Vorticity => 1.0,
        };
        for (s, f) in self.sup.iter_mut().zip(parts) {
            let row = [w * f.linf, f.besov, f.bmo, time_weight * f.fourth];
            for (a, b) in s.iter_mut().zip(row) {
                *a = a.max(b);
            }
        }
    }

    pub fn add_velocity(&mut self, t: f64, velocity_linf: [f64; 2], vorticity: [&FieldNorms; 2]) {
        let w = phi1(t);
        for ((s, v), om) in self.velocity.iter_mut().zip(velocity_linf).zip(vorticity) {
            *s = s.max(w * v);
            let denom = om.linf + om.fourth;
            if denom > 0.0 {
                self.velocity_ratio = self.velocity_ratio.max(v / denom);
            }
        }
    }

    pub fn finish(&self, n: usize, mode: Mode) -> Monitors {
        let col = |j: usize| self.sup[0][j] + self.sup[1][j];
        let recovered_velocity = match mode {
            Mode::Velocity => None,
            Mode::Vorticity => Some(self.velocity[0] + self.velocity[1]),
        };
        let mut m = Monitors {
            n,
            weighted_linf: col(0),
            besov: col(1),
            bmo: col(2),
            fourth: col(3),
            recovered_velocity,
            max: 0.0,
        };
        m.max = m.values().iter().copied().fold(0.0, f64::max);
        m
    }
}

/// `sup_t φ₁(t)(‖re_a − re_b‖_∞ + ‖im_a − im_b‖_∞)`.
pub fn weighted_difference(times: &[f64], a: &[ComplexPair], b: &[ComplexPair]) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for ((&t, x), y) in times.iter().zip(a).zip(b) {
        if t == 0.0 {
            continue;
        }
        let dr = crate::spaces::linf_norm(&x.re.sub(&y.re)?);
        let di = crate::spaces::linf_norm(&x.im.sub(&y.im)?);
        sup = sup.max(phi1(t) * (dr + di));
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn monitors_are_sums_of_suprema() {
        let mut acc = MonitorAccumulator::default();
        let a = FieldNorms { linf: 1.0, besov: 2.0, bmo: 3.0, fourth: 4.0 };
        let b = FieldNorms { linf: 0.5, besov: 0.5, bmo: 0.5, fourth: 0.5 };
        acc.add(0.25, [&a, &b], Mode::Velocity);
        acc.add(0.5, [&b, &a], Mode::Velocity);
        let m = acc.finish(3, Mode::Velocity);
        assert_eq!(m.besov, 4.0);
        assert_eq!(m.bmo, 6.0);
        assert!((m.fourth - (0.5f64.sqrt() * 4.0 + 0.5 * 4.0)).abs() < 1e-15);
        assert!((m.weighted_linf - (phi1(0.25).max(0.5 * phi1(0.5)) + phi1(0.5))).abs() < 1e-15);
        assert_eq!(m.max, 6.0);
        assert!(m.recovered_velocity.is_none());
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let g = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let n = FieldNorms::compute(&SpectralField::zeros(g, 2, true), Mode::Velocity, 2.0).unwrap();
        assert_eq!(n, FieldNorms::default());
    }
}
