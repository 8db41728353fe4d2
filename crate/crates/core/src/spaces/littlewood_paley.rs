use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::spectral::SpectralField;

fn transition(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth radial bump: 1 on `r ≤ 1`, 0 on `r ≥ 2`, C^∞ in between.
pub fn bump(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let a = transition(2.0 - r);
    a / (a + transition(r - 1.0))
}

/// Annulus multiplier `φ̂_j(k) = χ(|k|/2^j) − χ(|k|/2^{j−1})`.
pub fn annulus(j: i32, k: f64) -> f64 {
    let s = 2f64.powi(j);
    bump(k / s) - bump(2.0 * k / s)
}

/// Low-frequency multiplier `χ(|k|)`, the inhomogeneous block labelled 0.
pub fn low_block(k: f64) -> f64 {
    bump(k)
}

/// Band-passed copies `φ_j * f` of a field.
#[derive(Debug, Clone)]
pub struct LpDecomposition {
    pub homogeneous: bool,
    /// `(j, block)`, in increasing `j`. For the inhomogeneous family the
    /// entry `j = 0` is the low-frequency ball.
    pub blocks: Vec<(i32, SpectralField)>,
    /// Homogeneous decompositions drop the `k = 0` mode; set when it was nonzero.
    pub mean_excluded: bool,
}

/// Index range `[j_min, j_max]` of the decomposition on the grid of `f`.
pub fn block_range(f: &SpectralField, homogeneous: bool) -> (i32, i32) {
    let g = f.grid();
    let j_max = g.max_wavenumber().log2().ceil() as i32;
    if homogeneous {
        (g.dk().log2().floor() as i32, j_max.max(g.dk().log2().floor() as i32))
    } else {
        (0, j_max.max(0))
    }
}

pub fn lp_decompose(f: &SpectralField, homogeneous: bool) -> LpDecomposition {
    let g = *f.grid();
    let (j_min, j_max) = block_range(f, homogeneous);
    let blocks = (j_min..=j_max)
        .into_par_iter()
        .map(|j| {
            let block = f.apply_symbol(|i| {
                let k = g.k_norm(i);
                let m = if homogeneous {
                    if i == 0 {
                        0.0
                    } else {
                        annulus(j, k)
                    }
                } else if j == 0 {
                    low_block(k)
                } else {
                    annulus(j, k)
                };
                Complex64::new(m, 0.0)
            });
            (j, block)
        })
        .collect();
    let mean_excluded = homogeneous && f.all_coeffs().iter().any(|c| c[0].norm() > 0.0);
    if mean_excluded {
        log::debug!("homogeneous decomposition: k = 0 mode excluded");
    }
    LpDecomposition {
        homogeneous,
        blocks,
        mean_excluded,
    }
}

impl LpDecomposition {
    /// `Σ_j φ_j * f`.
    pub fn reconstruct(&self) -> Result<SpectralField> {
        let mut iter = self.blocks.iter();
        let (_, first) = iter.next().expect("decomposition has at least one block");
        let mut acc = first.clone();
        for (_, b) in iter {
            acc = acc.add(b)?;
        }
        Ok(acc)
    }

    pub fn block(&self, j: i32) -> Option<&SpectralField> {
        self.blocks.iter().find(|(i, _)| *i == j).map(|(_, b)| b)
    }
}
