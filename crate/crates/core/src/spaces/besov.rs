use crate::error::{OscError, Result};
use crate::spaces::littlewood_paley::{lp_decompose, LpDecomposition};
use crate::spaces::lp::{check_exponent, lp_norm};
use crate::spectral::SpectralField;

/// Besov index triple with its validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        check_exponent(p)?;
        check_exponent(q)?;
        if !(-2.0..=2.0).contains(&s) {
            return Err(OscError::InvalidParameter(format!(
                "smoothness must lie in [-2, 2], got {s}"
            )));
        }
        Ok(BesovIndex { s, p, q })
    }
}

/// `(Σ_j (2^{js}‖φ_j*f‖_{L^p})^q)^{1/q}` over a precomputed decomposition.
pub fn besov_from_blocks(d: &LpDecomposition, idx: BesovIndex) -> Result<f64> {
    let mut terms = Vec::with_capacity(d.blocks.len());
    for (j, block) in &d.blocks {
        terms.push(2f64.powf(*j as f64 * idx.s) * lp_norm(block, idx.p)?);
    }
    Ok(sequence_norm(&terms, idx.q))
}

pub(crate) fn sequence_norm(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return terms.iter().copied().fold(0.0, f64::max);
    }
    let top = terms.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    top * terms.iter().map(|t| (t / top).powf(q)).sum::<f64>().powf(1.0 / q)
}

/// Besov norm `B^s_{p,q}` (or `Ḃ^s_{p,q}` when `homogeneous`); the
/// homogeneous version ignores the mean.
pub fn besov_norm(f: &SpectralField, s: f64, p: f64, q: f64, homogeneous: bool) -> Result<f64> {
    let idx = BesovIndex::new(s, p, q)?;
    besov_from_blocks(&lp_decompose(f, homogeneous), idx)
}
