use crate::error::{OscError, Result};
use crate::spectral::{Grid, SpectralField};

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(OscError::InvalidParameter(format!(
            "exponent must lie in [1, ∞], got {p}"
        )));
    }
    Ok(())
}

/// `L^p` norm of pointwise magnitudes by grid quadrature.
pub fn lp_of_values(grid: &Grid, magnitudes: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(magnitudes.iter().copied().fold(0.0, f64::max));
    }
    let top = magnitudes.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    // Scaled by the max to keep |f|^p in range.
    let sum: f64 = magnitudes.iter().map(|m| (m / top).powf(p)).sum();
    Ok(top * (sum * grid.cell_volume()).powf(1.0 / p))
}

/// `L^p` norm of a (vector) field; vectors use the pointwise Euclidean length.
pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    lp_of_values(f.grid(), &f.magnitude_values(), p)
}

pub fn linf_norm(f: &SpectralField) -> f64 {
    f.magnitude_values().into_iter().fold(0.0, f64::max)
}

/// Pointwise Euclidean magnitude of real component samples.
pub fn magnitudes(values: &[Vec<f64>]) -> Vec<f64> {
    let n = values.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| values.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_field_l2_on_square() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = SpectralField::sample(g, 1, |_, _| 1.0);
        assert!((lp_norm(&f, 2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(lp_norm(&SpectralField::zeros(g, 1, true), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn cosine_sup_is_one() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = SpectralField::sample(g, 1, |x, _| x[0].cos());
        assert!((linf_norm(&f) - 1.0).abs() < 1e-6);
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn exponent_below_one_rejected() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        assert!(lp_norm(&SpectralField::zeros(g, 1, true), 0.5).is_err());
    }
}
