use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::fft_nd;
use super::Grid;
use crate::error::{OscError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A periodic scalar or vector field stored by its Fourier coefficients
/// `û(k) = N^{-d} Σ_x f(x) e^{-ik·x}`, one coefficient array per component.
///
/// The `real` flag records that every component is real-valued, i.e.
/// `û(−k) = conj(û(k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Vec<Complex64>>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: Grid, components: usize, real: bool) -> Self {
        SpectralField {
            grid,
            coeffs: vec![vec![ZERO; grid.len()]; components.max(1)],
            real,
        }
    }

    pub fn from_coefficients(grid: Grid, coeffs: Vec<Vec<Complex64>>, real: bool) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(OscError::ShapeMismatch("field needs at least one component".into()));
        }
        for (c, comp) in coeffs.iter().enumerate() {
            if comp.len() != grid.len() {
                return Err(OscError::ShapeMismatch(format!(
                    "component {c} has {} coefficients, grid needs {}",
                    comp.len(),
                    grid.len()
                )));
            }
        }
        Ok(SpectralField { grid, coeffs, real })
    }

    /// Forward transform of real point values (one vector per component).
    pub fn from_real_values(grid: Grid, values: &[Vec<f64>]) -> Result<Self> {
        let complex: Vec<Vec<Complex64>> = values
            .iter()
            .map(|v| v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        let mut field = Self::from_complex_values(grid, &complex)?;
        field.real = true;
        field.enforce_reality();
        Ok(field)
    }

    /// Forward transform of complex point values.
    pub fn from_complex_values(grid: Grid, values: &[Vec<Complex64>]) -> Result<Self> {
        if values.is_empty() {
            return Err(OscError::ShapeMismatch("field needs at least one component".into()));
        }
        let scale = 1.0 / grid.len() as f64;
        let coeffs = values
            .iter()
            .enumerate()
            .map(|(c, v)| {
                if v.len() != grid.len() {
                    return Err(OscError::ShapeMismatch(format!(
                        "component {c} has {} samples, grid needs {}",
                        v.len(),
                        grid.len()
                    )));
                }
                let mut data = v.clone();
                fft_nd(&mut data, &grid, false);
                data.iter_mut().for_each(|z| *z *= scale);
                Ok(data)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralField {
            grid,
            coeffs,
            real: false,
        })
    }

    /// Samples a real vector field `x ↦ f(x)` with `components` entries.
    pub fn sample<F>(grid: Grid, components: usize, f: F) -> Self
    where
        F: Fn(&[f64; 3], usize) -> f64 + Sync,
    {
        let values: Vec<Vec<f64>> = (0..components)
            .map(|c| {
                (0..grid.len())
                    .into_par_iter()
                    .map(|i| f(&grid.position(i), c))
                    .collect()
            })
            .collect();
        Self::from_real_values(grid, &values).expect("sampled shape matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn set_real(&mut self, real: bool) {
        self.real = real;
    }

    pub fn coeffs(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn coeffs_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.coeffs[c]
    }

    pub fn all_coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Vec<Complex64>> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: vec![self.coeffs[c].clone()],
            real: self.real,
        }
    }

    /// Stacks scalar fields into one vector field.
    pub fn stack(parts: &[SpectralField]) -> Result<SpectralField> {
        let first = parts
            .first()
            .ok_or_else(|| OscError::ShapeMismatch("nothing to stack".into()))?;
        let mut coeffs = Vec::new();
        let mut real = true;
        for p in parts {
            first.check_grid(p)?;
            real &= p.real;
            coeffs.extend(p.coeffs.iter().cloned());
        }
        Ok(SpectralField {
            grid: first.grid,
            coeffs,
            real,
        })
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(OscError::ShapeMismatch(format!(
                "grids differ: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        self.check_grid(other)?;
        if self.components() != other.components() {
            return Err(OscError::ShapeMismatch(format!(
                "component counts differ: {} vs {}",
                self.components(),
                other.components()
            )));
        }
        Ok(())
    }

    /// Inverse transform to complex point values.
    pub fn to_complex_values(&self) -> Vec<Vec<Complex64>> {
        self.coeffs
            .par_iter()
            .map(|c| {
                let mut data = c.clone();
                fft_nd(&mut data, &self.grid, true);
                data
            })
            .collect()
    }

    /// Inverse transform keeping the real part of every sample.
    pub fn to_real_values(&self) -> Vec<Vec<f64>> {
        self.to_complex_values()
            .into_iter()
            .map(|v| v.into_iter().map(|z| z.re).collect())
            .collect()
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitude_values(&self) -> Vec<f64> {
        let values = self.to_complex_values();
        let mut out = vec![0.0; self.grid.len()];
        for comp in &values {
            for (o, z) in out.iter_mut().zip(comp) {
                *o += z.norm_sqr();
            }
        }
        out.iter_mut().for_each(|o| *o = o.sqrt());
        out
    }

    /// Multiplies every component by a Fourier symbol.
    pub fn apply_symbol<S>(&self, symbol: S) -> SpectralField
    where
        S: Fn(usize) -> Complex64 + Sync,
    {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                c.par_iter()
                    .enumerate()
                    .map(|(i, z)| z * symbol(i))
                    .collect()
            })
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
            real: self.real,
        }
    }

    pub fn scale(&self, factor: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .flat_map(|c| c.iter_mut())
            .for_each(|z| *z *= factor);
        out
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (dst, src) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * a;
            }
        }
        out.real = self.real && other.real;
        Ok(out)
    }

    pub fn mean(&self, c: usize) -> Complex64 {
        self.coeffs[c][0]
    }

    /// Largest coefficient modulus over all components.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_k |û(k)|²` summed over components (equals the spatial mean of `|f|²`).
    pub fn energy(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.max_coeff() == 0.0
    }

    /// Largest `|û(−k) − conj(û(k))|` over all coefficients.
    pub fn reality_defect(&self) -> f64 {
        let g = self.grid;
        self.coeffs
            .iter()
            .map(|c| {
                (0..g.len())
                    .map(|i| (c[g.negated(i)] - c[i].conj()).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Symmetrises coefficients so that the represented field is real.
    pub fn enforce_reality(&mut self) {
        let g = self.grid;
        for c in self.coeffs.iter_mut() {
            let orig = c.clone();
            for (i, z) in c.iter_mut().enumerate() {
                *z = 0.5 * (orig[i] + orig[g.negated(i)].conj());
            }
        }
        self.real = true;
    }

    /// Zeroes every mode outside the 2/3-rule box.
    pub fn dealiased(&self) -> SpectralField {
        let g = self.grid;
        self.apply_symbol(|i| {
            if g.dealias_keep(i) {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Same field on another grid with identical period: modes present on
    /// both lattices are copied, the rest are zero.
    pub fn resampled(&self, target: Grid) -> Result<SpectralField> {
        if target.dim() != self.grid.dim() || (target.length() - self.grid.length()).abs() > 0.0 {
            return Err(OscError::ShapeMismatch(
                "resampling needs identical dimension and period".into(),
            ));
        }
        let half = (self.grid.n().min(target.n()) / 2) as i64;
        let mut out = SpectralField::zeros(target, self.components(), self.real);
        for c in 0..self.components() {
            for i in 0..self.grid.len() {
                let f = self.grid.freq(i);
                // Drop the (ambiguous) Nyquist plane of the coarser grid.
                if f.iter().any(|x| x.abs() >= half) {
                    continue;
                }
                out.coeffs[c][target.flat_of_freq(f)] = self.coeffs[c][i];
            }
        }
        Ok(out)
    }
}

/// Forward transform of real samples (one vector per component).
pub fn transform_forward(grid: Grid, values: &[Vec<f64>]) -> Result<SpectralField> {
    SpectralField::from_real_values(grid, values)
}

/// Inverse transform to point values.
pub fn transform_inverse(field: &SpectralField) -> Vec<Vec<Complex64>> {
    field.to_complex_values()
}

/// `(re, im)` pair of real fields holding a complexified quantity such as
/// `U + iV`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPair {
    pub re: SpectralField,
    pub im: SpectralField,
}

impl ComplexPair {
    pub fn new(re: SpectralField, im: SpectralField) -> Result<Self> {
        re.check_compatible(&im)?;
        if !re.is_real() || !im.is_real() {
            return Err(OscError::ShapeMismatch(
                "both parts of a complex pair must be real-valued fields".into(),
            ));
        }
        Ok(ComplexPair { re, im })
    }

    pub fn zeros(grid: Grid, components: usize) -> Self {
        ComplexPair {
            re: SpectralField::zeros(grid, components, true),
            im: SpectralField::zeros(grid, components, true),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.re.grid()
    }

    pub fn components(&self) -> usize {
        self.re.components()
    }

    /// Coefficients of the complex field `re + i·im` (not conjugate-symmetric).
    pub fn combined(&self) -> SpectralField {
        let coeffs = self
            .re
            .all_coeffs()
            .iter()
            .zip(self.im.all_coeffs())
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x + Complex64::i() * y)
                    .collect()
            })
            .collect();
        SpectralField::from_coefficients(*self.grid(), coeffs, false).expect("same grid")
    }

    /// Splits the coefficients of a complex field `w` into real and
    /// imaginary parts, both real-valued fields.
    pub fn from_combined(w: &SpectralField) -> ComplexPair {
        let g = *w.grid();
        let mut re = SpectralField::zeros(g, w.components(), true);
        let mut im = SpectralField::zeros(g, w.components(), true);
        for c in 0..w.components() {
            let src = w.coeffs(c);
            let (r, m) = (re.coeffs_mut(c), im.coeffs_mut(c));
            for i in 0..g.len() {
                let conj_neg = src[g.negated(i)].conj();
                r[i] = 0.5 * (src[i] + conj_neg);
                m[i] = (src[i] - conj_neg) / Complex64::new(0.0, 2.0);
            }
        }
        ComplexPair { re, im }
    }
}
