use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};

/// Periodic box `[0, L)^d` sampled at `N` points per axis.
///
/// Coefficient and sample arrays are stored row-major with axis 0 slowest.
/// Along every axis the frequency index follows the usual FFT order:
/// `0, 1, …, N/2 − 1, −N/2, …, −1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
}

fn default_length() -> f64 {
    2.0 * PI
}

impl TryFrom<GridSpec> for Grid {
    type Error = OscError;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.dim, spec.n, spec.length)
    }
}

impl From<Grid> for GridSpec {
    fn from(grid: Grid) -> Self {
        GridSpec {
            dim: grid.dim,
            n: grid.n,
            length: grid.length,
        }
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(OscError::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(OscError::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(OscError::InvalidGrid(format!(
                "period must be positive and finite, got {length}"
            )));
        }
        Ok(Grid { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of grid points (and of Fourier coefficients).
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Wavenumber lattice spacing `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed frequency index of array position `i` along one axis.
    pub fn freq_index(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Axis indices of a flat position; unused axes are 0.
    pub fn indices(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [flat / n, flat % n, 0],
            _ => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    pub fn flat(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => idx[0] * n + idx[1],
            _ => (idx[0] * n + idx[1]) * n + idx[2],
        }
    }

    /// Integer frequency vector of a flat position; unused axes are 0.
    pub fn freq(&self, flat: usize) -> [i64; 3] {
        let idx = self.indices(flat);
        let mut out = [0i64; 3];
        for a in 0..self.dim {
            out[a] = self.freq_index(idx[a]);
        }
        out
    }

    /// Flat position holding the frequency `freq` (taken modulo `N`).
    pub fn flat_of_freq(&self, freq: [i64; 3]) -> usize {
        let n = self.n as i64;
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            idx[a] = freq[a].rem_euclid(n) as usize;
        }
        self.flat(idx)
    }

    /// Flat position of `−k`.
    pub fn negated(&self, flat: usize) -> usize {
        let f = self.freq(flat);
        self.flat_of_freq([-f[0], -f[1], -f[2]])
    }

    /// Physical wavevector `k = (2π/L)·freq`.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let f = self.freq(flat);
        let dk = self.dk();
        [f[0] as f64 * dk, f[1] as f64 * dk, f[2] as f64 * dk]
    }

    /// Wavevector used for odd-order derivatives: the Nyquist component is
    /// zeroed so that derivatives of real fields stay real.
    pub fn deriv_wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.indices(flat);
        let mut k = self.wavevector(flat);
        for a in 0..self.dim {
            if idx[a] == self.n / 2 {
                k[a] = 0.0;
            }
        }
        k
    }

    pub fn k_squared(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    pub fn k_norm(&self, flat: usize) -> f64 {
        self.k_squared(flat).sqrt()
    }

    /// Largest `|k|` on the lattice (corner of the frequency box).
    pub fn max_wavenumber(&self) -> f64 {
        self.dk() * (self.n as f64 / 2.0) * (self.dim as f64).sqrt()
    }

    /// 2/3-rule mask: true when every `|freq_i| ≤ N/3`.
    pub fn dealias_keep(&self, flat: usize) -> bool {
        let cutoff = (self.n / 3) as i64;
        self.freq(flat).iter().all(|f| f.abs() <= cutoff)
    }

    /// Coordinates of grid point `flat`; unused axes are 0.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.indices(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }

    /// Same box with twice the resolution.
    pub fn refined(&self) -> Grid {
        Grid {
            dim: self.dim,
            n: self.n * 2,
            length: self.length,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(1, 8, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(2, 12, 1.0).is_err());
        assert!(Grid::new(2, 4, 1.0).is_err());
        assert!(Grid::new(2, 8, 0.0).is_err());
        assert!(Grid::new(2, 8, f64::NAN).is_err());
    }

    #[test]
    fn lattice_for_n8_unit_spacing() {
        let g = Grid::new(2, 8, 2.0 * PI).unwrap();
        let mut ks: Vec<i64> = (0..8).map(|i| g.freq_index(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        ks.sort();
        assert_eq!(ks, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        assert!((g.dk() - 1.0).abs() < 1e-15);
        assert_eq!(g.len(), 64);
    }

    #[test]
    fn lattice_3d_n16() {
        let g = Grid::new(3, 16, 2.0 * PI).unwrap();
        assert_eq!(g.len(), 16 * 16 * 16);
        let k = g.wavevector(g.flat_of_freq([1, -2, 3]));
        assert!((k[0] - 1.0).abs() < 1e-15);
        assert!((k[1] + 2.0).abs() < 1e-15);
        assert!((k[2] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn spacing_half_for_4pi() {
        let g = Grid::new(2, 8, 4.0 * PI).unwrap();
        assert!((g.dk() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn negation_is_an_involution() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.negated(g.negated(flat)), flat);
        }
    }

    #[test]
    fn grid_roundtrips_through_json() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: Grid = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
        assert!(serde_json::from_str::<Grid>(r#"{"dim":5,"n":8}"#).is_err());
    }
}
