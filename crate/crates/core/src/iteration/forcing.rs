use num_complex::Complex64;

use crate::error::{OscError, Result};
use crate::semigroup::{curl, divergence_defect};
use crate::spaces::bmo_norm;
use crate::spectral::{ComplexPair, Grid, SpectralField};

use super::config::{ForcingSpec, Partner, TrigTerm};

const I: Complex64 = Complex64::new(0.0, 1.0);
const DIV_TOL: f64 = 1e-12;

/// Forcing pair `(F, G)` along the shifted path.
#[derive(Debug, Clone)]
pub struct Forcing {
    f: SpectralField,
    partner: Option<SpectralField>,
    alpha: Vec<f64>,
}

fn build(grid: Grid, terms: &[TrigTerm]) -> Result<SpectralField> {
    let pieces = vec![super::config::DataPiece::Modes { terms: terms.to_vec() }];
    Ok(super::config::build_data(grid, &pieces, 0)?.dealiased())
}

impl Forcing {
    pub fn new(grid: Grid, spec: &ForcingSpec, alpha: &[f64]) -> Result<Self> {
        let f = build(grid, &spec.terms)?;
        if divergence_defect(&f)? > DIV_TOL {
            return Err(OscError::Config("forcing f must be divergence-free".into()));
        }
        let partner = match &spec.partner {
            Partner::Harmonic => None,
            Partner::Terms { terms } => {
                let g = build(grid, terms)?;
                if divergence_defect(&g)? > DIV_TOL {
                    return Err(OscError::Config("forcing partner g must be divergence-free".into()));
                }
                Some(g)
            }
        };
        Ok(Forcing { f, partner, alpha: alpha.to_vec() })
    }

    pub fn zero(grid: Grid) -> Self {
        let d = grid.dim();
        Forcing { f: SpectralField::zeros(grid, d, true), partner: None, alpha: vec![0.0; d] }
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero() && self.partner.as_ref().is_none_or(SpectralField::is_zero)
    }

    /// `F(t)` and `G(t)`; for the harmonic partner these are the real and
    /// imaginary parts of `f(x + iαt)`: `F̂ = f̂ cosh(k·y)`, `Ĝ = i f̂ sinh(k·y)`.
    pub fn at(&self, t: f64) -> ComplexPair {
        let grid = *self.f.grid();
        if let Some(g) = &self.partner {
            return ComplexPair { re: self.f.clone(), im: g.clone() };
        }
        if self.alpha.iter().all(|&a| a == 0.0) || t == 0.0 {
            return ComplexPair { re: self.f.clone(), im: SpectralField::zeros(grid, self.f.components(), true) };
        }
        let ky = |i: usize| {
            let k = grid.wavevector(i);
            self.alpha.iter().zip(k).map(|(a, k)| a * t * k).sum::<f64>()
        };
        let re = self.f.apply_symbol(|i| Complex64::new(ky(i).cosh(), 0.0));
        let im = self.f.apply_symbol(|i| I * ky(i).sinh());
        ComplexPair { re, im }
    }

    /// Curl of [`Forcing::at`] (vorticity scheme).
    pub fn curl_at(&self, t: f64) -> Result<ComplexPair> {
        let p = self.at(t);
        Ok(ComplexPair { re: curl(&p.re)?, im: curl(&p.im)? })
    }

    /// `Γ = sup_t (‖F(t)‖_bmo + ‖G(t)‖_bmo)` over the given times.
    pub fn level(&self, times: &[f64]) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let mut gamma: f64 = 0.0;
        for &t in times {
            let p = self.at(t);
            gamma = gamma.max(bmo_norm(&p.re, true)? + bmo_norm(&p.im, true)?);
        }
        Ok(gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::evaluate_complex_shift;

    fn spec() -> ForcingSpec {
        ForcingSpec {
            terms: vec![TrigTerm { freq: vec![1, 2], cos: vec![0.2, -0.1], sin: vec![] }],
            partner: Partner::Harmonic,
        }
    }

    #[test]
    fn harmonic_partner_is_the_complex_shift_of_f() {
        let g = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let alpha = [0.3, -0.2];
        let forcing = Forcing::new(g, &spec(), &alpha).unwrap();
        let t = 0.7;
        let pair = forcing.at(t);
        let y: Vec<f64> = alpha.iter().map(|a| a * t).collect();
        let shifted = evaluate_complex_shift(&forcing.f, &y).unwrap();
        let (re, im) = (pair.re.to_real_values(), pair.im.to_real_values());
        for c in 0..2 {
            for i in 0..g.len() {
                let z = shifted.values[c][i];
                assert!((re[c][i] - z.re).abs() < 1e-14 && (im[c][i] - z.im).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn compressible_forcing_is_rejected() {
        let g = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let bad = ForcingSpec {
            terms: vec![TrigTerm { freq: vec![1, 0], cos: vec![1.0, 0.0], sin: vec![] }],
            partner: Partner::Harmonic,
        };
        assert!(matches!(Forcing::new(g, &bad, &[0.0, 0.0]), Err(OscError::Config(_))));
    }

    #[test]
    fn zero_shift_gives_zero_partner() {
        let g = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let forcing = Forcing::new(g, &spec(), &[0.0, 0.0]).unwrap();
        assert!(forcing.at(0.5).im.is_zero());
        assert!(forcing.level(&[0.0, 0.5]).unwrap() > 0.0);
    }
}
