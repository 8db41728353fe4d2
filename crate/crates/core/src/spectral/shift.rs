use num_complex::Complex64;
use rayon::prelude::*;

use super::{Grid, SpectralField};
use crate::error::{OscError, Result};

/// Exponent beyond which `e^{|k·y|}` is treated as overflowing.
pub const SHIFT_OVERFLOW: f64 = 700.0;

/// Point values of `f(x + iy)` on the grid, one vector per component.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedValues {
    pub values: Vec<Vec<Complex64>>,
    /// Set when some `|k·y|` over the nonzero coefficients exceeds the
    /// overflow guard; `values` then hold infinities.
    pub overflow: bool,
}

impl ShiftedValues {
    pub fn max_magnitude(&self) -> f64 {
        if self.overflow {
            return f64::INFINITY;
        }
        let n = self.values.first().map_or(0, Vec::len);
        (0..n)
            .map(|i| {
                self.values
                    .iter()
                    .map(|c| c[i].norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Largest `|k·y|` over the modes where `f` has a nonzero coefficient.
pub fn max_shift_exponent(f: &SpectralField, y: &[f64]) -> f64 {
    let g = f.grid();
    (0..g.len())
        .filter(|&i| f.all_coeffs().iter().any(|c| c[i] != Complex64::new(0.0, 0.0)))
        .map(|i| {
            let k = g.wavevector(i);
            k.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().abs()
        })
        .fold(0.0, f64::max)
}

/// Coefficients of `x ↦ f(x + iy)`, i.e. `û(k)e^{−k·y}`.
pub fn shifted_coefficients(f: &SpectralField, y: &[f64]) -> Result<SpectralField> {
    let g: Grid = *f.grid();
    if y.len() != g.dim() {
        return Err(OscError::ShapeMismatch(format!(
            "shift has {} entries, grid dimension is {}",
            y.len(),
            g.dim()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(OscError::InvalidParameter("shift must be finite".into()));
    }
    let mut out = f.apply_symbol(|i| {
        let k = g.wavevector(i);
        let ky: f64 = k.iter().zip(y).map(|(a, b)| a * b).sum();
        Complex64::new((-ky).exp(), 0.0)
    });
    out.set_real(false);
    Ok(out)
}

/// Evaluates `f(x+iy) = Σ û(k) e^{ik·x} e^{−k·y}` on the grid.
pub fn evaluate_complex_shift(f: &SpectralField, y: &[f64]) -> Result<ShiftedValues> {
    let g = *f.grid();
    if y.len() != g.dim() {
        return Err(OscError::ShapeMismatch(format!(
            "shift has {} entries, grid dimension is {}",
            y.len(),
            g.dim()
        )));
    }
    if max_shift_exponent(f, y) > SHIFT_OVERFLOW {
        let inf = Complex64::new(f64::INFINITY, f64::INFINITY);
        return Ok(ShiftedValues {
            values: vec![vec![inf; g.len()]; f.components()],
            overflow: true,
        });
    }
    let shifted = shifted_coefficients(f, y)?;
    Ok(ShiftedValues {
        values: shifted.to_complex_values(),
        overflow: false,
    })
}

/// Evaluates several shifts in parallel.
pub fn evaluate_many(f: &SpectralField, shifts: &[Vec<f64>]) -> Result<Vec<ShiftedValues>> {
    shifts
        .par_iter()
        .map(|y| evaluate_complex_shift(f, y))
        .collect()
}
