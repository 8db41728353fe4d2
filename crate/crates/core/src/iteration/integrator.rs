//! Exact-in-the-linear-part time stepping.
//!
//! Writing `P = Û + iV̂` and `M = Û − iV̂`, the shifted linear system
//! decouples mode by mode into `P' = −(|k|² + α·k)P + S_P` and
//! `M' = −(|k|² − α·k)M + S_M`. Between snapshots the sources are linear in
//! time and the integrals are done exactly.

use num_complex::Complex64;

use crate::error::Result;
use crate::spectral::{ComplexPair, Grid, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);
const SERIES_SWITCH: f64 = 0.5;
const SERIES_TERMS: usize = 30;

/// `(e^{−z}, E₂/h, (E₁ − E₂)/h)` for `z = λh`, where
/// `E₁ = ∫₀ʰ e^{−λ(h−s)} ds` and `E₂ = ∫₀ʰ e^{−λ(h−s)}(1 − s/h) ds`.
pub(crate) fn step_factors(z: f64) -> (f64, f64, f64) {
    let decay = (-z).exp();
    let (e1, e2) = if z.abs() < SERIES_SWITCH {
        // E₁/h = Σ (−z)^n/(n+1)!,  E₂/h = Σ (−z)^n (n+1)/(n+2)!
        let (mut e1, mut e2) = (0.0, 0.0);
        let mut term = 1.0; // (−z)^n / n!
        for n in 0..SERIES_TERMS {
            let nf = n as f64;
            e1 += term / (nf + 1.0);
            e2 += term / (nf + 2.0);
            term *= -z / (nf + 1.0);
        }
        (e1, e2)
    } else {
        ((1.0 - decay) / z, (1.0 - decay * (1.0 + z)) / (z * z))
    };
    (decay, e2, e1 - e2)
}

/// Modal decay rates of `P` and `M`.
#[derive(Debug, Clone)]
pub(crate) struct ModalRates {
    pub p: Vec<f64>,
    pub m: Vec<f64>,
}

impl ModalRates {
    pub fn new(grid: &Grid, alpha: &[f64]) -> Self {
        let (mut p, mut m) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
        for i in 0..grid.len() {
            let k = grid.wavevector(i);
            let ak: f64 = alpha.iter().zip(k).map(|(a, k)| a * k).sum();
            let k2 = grid.k_squared(i);
            p.push(k2 + ak);
            m.push(k2 - ak);
        }
        ModalRates { p, m }
    }
}

type Modal = Vec<Vec<Complex64>>;

fn to_modal(pair: &ComplexPair) -> (Modal, Modal) {
    let split = |sign: f64| -> Modal {
        pair.re
            .all_coeffs()
            .iter()
            .zip(pair.im.all_coeffs())
            .map(|(u, v)| u.iter().zip(v).map(|(a, b)| a + I * sign * b).collect())
            .collect()
    };
    (split(1.0), split(-1.0))
}

fn from_modal(grid: Grid, p: &Modal, m: &Modal) -> ComplexPair {
    let mut re = Vec::with_capacity(p.len());
    let mut im = Vec::with_capacity(p.len());
    for (pc, mc) in p.iter().zip(m) {
        re.push(pc.iter().zip(mc).map(|(a, b)| 0.5 * (a + b)).collect());
        im.push(pc.iter().zip(mc).map(|(a, b)| (a - b) * (-0.5 * I)).collect());
    }
    ComplexPair {
        re: SpectralField::from_coefficients(grid, re, true).expect("grid-shaped"),
        im: SpectralField::from_coefficients(grid, im, true).expect("grid-shaped"),
    }
}

/// Marches `initial` over `times` with piecewise linear sources (one per
/// snapshot). The first snapshot is `initial` itself, unchanged.
pub(crate) fn march(initial: &ComplexPair, sources: &[ComplexPair], times: &[f64], rates: &ModalRates) -> Result<Vec<ComplexPair>> {
    let grid = *initial.grid();
    let (mut p, mut m) = to_modal(initial);
    let mut out = Vec::with_capacity(times.len());
    out.push(initial.clone());
    let (mut sp0, mut sm0) = to_modal(&sources[0]);
    for j in 0..times.len() - 1 {
        let h = times[j + 1] - times[j];
        let (sp1, sm1) = to_modal(&sources[j + 1]);
        advance(&mut p, &sp0, &sp1, &rates.p, h);
        advance(&mut m, &sm0, &sm1, &rates.m, h);
        out.push(from_modal(grid, &p, &m));
        (sp0, sm0) = (sp1, sm1);
    }
    Ok(out)
}

fn advance(state: &mut Modal, s0: &Modal, s1: &Modal, rates: &[f64], h: f64) {
    let factors: Vec<(f64, f64, f64)> = rates.iter().map(|&l| step_factors(l * h)).collect();
    for c in 0..state.len() {
        for (i, &(decay, w0, w1)) in factors.iter().enumerate() {
            state[c][i] = decay * state[c][i] + h * (w0 * s0[c][i] + w1 * s1[c][i]);
        }
    }
}

/// Exact linear evolution `e^{τ𝓛}` of a pair.
pub(crate) fn propagate(pair: &ComplexPair, tau: f64, rates: &ModalRates) -> ComplexPair {
    let (mut p, mut m) = to_modal(pair);
    for (state, r) in [(&mut p, &rates.p), (&mut m, &rates.m)] {
        for comp in state.iter_mut() {
            for (z, &l) in comp.iter_mut().zip(r) {
                *z *= (-l * tau).exp();
            }
        }
    }
    from_modal(*pair.grid(), &p, &m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::gauss_legendre;

    fn quad(z: f64, f: impl Fn(f64) -> f64) -> f64 {
        // ∫₀¹ e^{−z(1−s)} f(s) ds by composite Gauss–Legendre
        let (x, w) = gauss_legendre(40);
        let panels = 20;
        let mut acc = 0.0;
        for p in 0..panels {
            let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
            for (xi, wi) in x.iter().zip(&w) {
                let s = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                acc += 0.5 * (b - a) * wi * (-z * (1.0 - s)).exp() * f(s);
            }
        }
        acc
    }

    #[test]
    fn step_factors_match_quadrature_on_both_branches() {
        for z in [-0.3, -1e-9, 0.0, 1e-7, 0.2, 0.49, 0.51, 1.0, 7.0, 60.0] {
            let (decay, w0, w1) = step_factors(z);
            assert_eq!(decay, (-z).exp());
            let e2 = quad(z, |s| 1.0 - s);
            let e1 = quad(z, |_| 1.0);
            assert!((w0 - e2).abs() < 1e-14 * e1.abs().max(1.0), "z={z}");
            assert!((w1 - (e1 - e2)).abs() < 1e-14 * e1.abs().max(1.0), "z={z}");
        }
    }

    #[test]
    fn factors_are_continuous_at_the_series_switch() {
        let a = step_factors(SERIES_SWITCH * (1.0 - 1e-15));
        let b = step_factors(SERIES_SWITCH * (1.0 + 1e-15));
        assert!((a.1 - b.1).abs() < 1e-15 && (a.2 - b.2).abs() < 1e-15, "{a:?} {b:?}");
    }

    #[test]
    fn linear_source_is_integrated_exactly() {
        // Φ' = −λΦ + (a + b t), Φ(0) = φ₀: closed form
        let (lambda, a, b, phi0) = (3.0, 0.7, -1.3, 0.25);
        let times = [0.0, 0.1, 0.25, 0.6, 1.0];
        let exact = |t: f64| {
            let e = (-lambda * t).exp();
            phi0 * e + a * (1.0 - e) / lambda + b * (t / lambda - (1.0 - e) / (lambda * lambda))
        };
        let mut phi = phi0;
        for w in times.windows(2) {
            let h = w[1] - w[0];
            let (d, w0, w1) = step_factors(lambda * h);
            phi = d * phi + h * (w0 * (a + b * w[0]) + w1 * (a + b * w[1]));
            assert!((phi - exact(w[1])).abs() < 1e-15, "t={}", w[1]);
        }
    }
}
