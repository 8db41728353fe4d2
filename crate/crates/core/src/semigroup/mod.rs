//! Heat semigroup, projections, pressure, advection, Biot–Savart and
//! Duhamel integration.

pub mod quadrature;
mod source;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{OscError, Result};
use crate::spectral::{Grid, SpectralField};

pub use quadrature::{gauss_legendre, singular_integral, QuadratureRule};
pub use source::{SnapshotSource, SourceProvider};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `e^{tΔ}f`: multiplies by `e^{−t|k|²}`.
pub fn heat_apply(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(OscError::InvalidParameter(format!("heat time must be ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let g = *f.grid();
    Ok(f.apply_symbol(|i| real((-t * g.k_squared(i)).exp())))
}

/// `(−Δ)^α e^{tΔ}f`: symbol `|k|^{2α}e^{−t|k|²}`.
pub fn frac_heat_apply(f: &SpectralField, t: f64, alpha: f64) -> Result<SpectralField> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(OscError::InvalidParameter(format!("power must be ≥ 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return heat_apply(f, t);
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(OscError::InvalidParameter(format!(
            "fractional heat needs t > 0, got {t}"
        )));
    }
    let g = *f.grid();
    Ok(f.apply_symbol(|i| {
        let k2 = g.k_squared(i);
        real(k2.powf(alpha) * (-t * k2).exp())
    }))
}

fn check_vector(u: &SpectralField) -> Result<()> {
    if u.components() != u.grid().dim() {
        return Err(OscError::ShapeMismatch(format!(
            "expected a {}-component vector field, got {}",
            u.grid().dim(),
            u.components()
        )));
    }
    Ok(())
}

/// Applies a matrix symbol `out_a(k) = Σ_b m(k)[a][b] û_b(k)`.
fn apply_matrix<M>(u: &SpectralField, rows: usize, m: M) -> SpectralField
where
    M: Fn(usize, usize, usize) -> Complex64 + Sync,
{
    let g = *u.grid();
    let cols = u.components();
    let mut out = vec![vec![ZERO; g.len()]; rows];
    let src = u.all_coeffs();
    out.iter_mut().enumerate().for_each(|(a, dst)| {
        dst.par_iter_mut().enumerate().for_each(|(i, z)| {
            *z = (0..cols).map(|b| m(i, a, b) * src[b][i]).sum();
        });
    });
    SpectralField::from_coefficients(g, out, u.is_real()).expect("grid-shaped")
}

/// Leray projection, symbol `δ_{jl} − k_j k_l/|k|²`; `k = 0` passes through.
pub fn leray_project(u: &SpectralField) -> Result<SpectralField> {
    check_vector(u)?;
    let g = *u.grid();
    Ok(apply_matrix(u, g.dim(), |i, a, b| {
        let delta = if a == b { 1.0 } else { 0.0 };
        if i == 0 {
            return real(delta);
        }
        let k = g.deriv_wavevector(i);
        let k2: f64 = k.iter().map(|v| v * v).sum();
        if k2 == 0.0 {
            return real(delta);
        }
        real(delta - k[a] * k[b] / k2)
    }))
}

/// `∂_j f` for every component, stacked as `[∂_0 f_0, …]` when `f` is scalar.
pub fn gradient(f: &SpectralField) -> Result<SpectralField> {
    if f.components() != 1 {
        return Err(OscError::ShapeMismatch("gradient takes a scalar field".into()));
    }
    let g = *f.grid();
    Ok(apply_matrix(f, g.dim(), |i, a, _| I * g.deriv_wavevector(i)[a]))
}

/// `∂_axis f`, all components.
pub fn partial(f: &SpectralField, axis: usize) -> SpectralField {
    let g = *f.grid();
    f.apply_symbol(|i| I * g.deriv_wavevector(i)[axis])
}

pub fn divergence(u: &SpectralField) -> Result<SpectralField> {
    check_vector(u)?;
    let g = *u.grid();
    Ok(apply_matrix(u, 1, |i, _, b| I * g.deriv_wavevector(i)[b]))
}

/// Largest `|k·û(k)|` relative to the largest coefficient.
pub fn divergence_defect(u: &SpectralField) -> Result<f64> {
    let d = divergence(u)?;
    let scale = u.max_coeff();
    Ok(if scale == 0.0 { 0.0 } else { d.max_coeff() / scale })
}

/// `∇ × u` for `d = 3`.
pub fn curl(u: &SpectralField) -> Result<SpectralField> {
    check_vector(u)?;
    if u.grid().dim() != 3 {
        return Err(OscError::InvalidParameter("curl needs d = 3".into()));
    }
    let g = *u.grid();
    Ok(apply_matrix(u, 3, |i, a, b| {
        let k = g.deriv_wavevector(i);
        // (k × u)_a = ε_{a c b} k_c u_b
        if a == b {
            return ZERO;
        }
        let c = 3 - a - b;
        let sign = if (a + 1) % 3 == c { 1.0 } else { -1.0 };
        I * (sign * k[c])
    }))
}

/// Biot–Savart law `û = i k × Ŵ/|k|²`, mean mode mapped to 0.
pub fn biot_savart(w: &SpectralField) -> Result<SpectralField> {
    if w.grid().dim() != 3 {
        return Err(OscError::InvalidParameter("Biot–Savart needs d = 3".into()));
    }
    check_vector(w)?;
    let g = *w.grid();
    Ok(apply_matrix(w, 3, |i, a, b| {
        if a == b || i == 0 {
            return ZERO;
        }
        let k = g.deriv_wavevector(i);
        let c = 3 - a - b;
        let sign = if (a + 1) % 3 == c { 1.0 } else { -1.0 };
        I * (sign * k[c] / g.k_squared(i))
    }))
}

/// Pseudo-spectral product of component samples, transformed and dealiased.
pub fn dealiased_from_values(grid: Grid, values: Vec<Vec<f64>>) -> SpectralField {
    SpectralField::from_real_values(grid, &values)
        .expect("grid-shaped")
        .dealiased()
}

/// Point values of every first derivative: `out[j][i]` is `∂_j b_i`.
pub fn derivative_values(b: &SpectralField) -> Vec<Vec<Vec<f64>>> {
    (0..b.grid().dim())
        .into_par_iter()
        .map(|j| partial(b, j).to_real_values())
        .collect()
}

/// `(a·∇)b` evaluated from samples of `a` and the derivatives of `b`.
pub fn advect_values(a_vals: &[Vec<f64>], db: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let comps = db[0].len();
    let n = a_vals[0].len();
    (0..comps)
        .map(|i| {
            (0..n)
                .map(|p| a_vals.iter().zip(db).map(|(aj, dj)| aj[p] * dj[i][p]).sum())
                .collect()
        })
        .collect()
}

/// `(a·∇)b`, dealiased.
pub fn advect(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    check_vector(a)?;
    a.check_grid(b)?;
    let defect = divergence_defect(a)?;
    if defect > 1e-8 {
        log::warn!("advecting field is not divergence-free (relative defect {defect:.3e})");
    }
    let av = a.to_real_values();
    Ok(dealiased_from_values(*a.grid(), advect_values(&av, &derivative_values(b))))
}

/// `∇·(a⊗b)`, i.e. `Σ_j ∂_j(a_j b_i)`, dealiased.
pub fn advect_divergence_form(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    check_vector(a)?;
    a.check_grid(b)?;
    let g = *a.grid();
    let av = a.to_real_values();
    let bv = b.to_real_values();
    let mut out = SpectralField::zeros(g, b.components(), true);
    for (j, aj) in av.iter().enumerate() {
        let prod: Vec<Vec<f64>> = bv
            .iter()
            .map(|bi| bi.iter().zip(aj).map(|(x, y)| x * y).collect())
            .collect();
        out = out.add(&partial(&dealiased_from_values(g, prod), j))?;
    }
    Ok(out)
}

/// Symmetric quadratic form `Σ_{j,k} k_j k_l/|k|² · (a_j b_l)^`, the
/// Fourier transform of `Δ^{-1}∂_j∂_l(a_j b_l)`; mean mode 0.
fn double_riesz(grid: Grid, a_vals: &[Vec<f64>], b_vals: &[Vec<f64>]) -> SpectralField {
    let d = grid.dim();
    let mut acc = vec![ZERO; grid.len()];
    for j in 0..d {
        for l in 0..d {
            let prod: Vec<f64> = a_vals[j].iter().zip(&b_vals[l]).map(|(x, y)| x * y).collect();
            let p = dealiased_from_values(grid, vec![prod]);
            acc.par_iter_mut().enumerate().for_each(|(i, z)| {
                if i != 0 {
                    let k = grid.wavevector(i);
                    *z += p.coeffs(0)[i] * (k[j] * k[l] / grid.k_squared(i));
                }
            });
        }
    }
    SpectralField::from_coefficients(grid, vec![acc], true).expect("grid-shaped")
}

/// `Π = −Δ^{-1}∂_j∂_k(U_jU_k − V_jV_k)`, `R = −2Δ^{-1}∂_j∂_k(U_jV_k)`.
pub fn pressure_pair(u: &SpectralField, v: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    check_vector(u)?;
    u.check_compatible(v)?;
    let g = *u.grid();
    let uv = u.to_real_values();
    let vv = v.to_real_values();
    pressure_pair_values(g, &uv, &vv)
}

pub(crate) fn pressure_pair_values(g: Grid, uv: &[Vec<f64>], vv: &[Vec<f64>]) -> Result<(SpectralField, SpectralField)> {
    // Δ^{-1}∂_j∂_l has symbol k_j k_l/|k|², hence the signs below.
    let uu = double_riesz(g, uv, uv);
    let vvv = double_riesz(g, vv, vv);
    let uvr = double_riesz(g, uv, vv);
    let pi = vvv.sub(&uu)?;
    let r = uvr.scale(-2.0);
    Ok((pi, r))
}

/// `∫₀ᵗ e^{(t−s)Δ} source(s) ds` with the rule's weights (which may carry
/// endpoint singular factors).
pub fn duhamel_integrate(source: &dyn SourceProvider, t: f64, rule: &QuadratureRule) -> Result<SpectralField> {
    if t == 0.0 {
        return Ok(SpectralField::zeros(source.grid(), source.components(), true));
    }
    if (rule.t - t).abs() > 1e-12 * t.max(1.0) {
        return Err(OscError::InvalidParameter(format!(
            "rule built for t = {}, asked for t = {t}",
            rule.t
        )));
    }
    let terms = (0..rule.len())
        .into_par_iter()
        .map(|i| {
            let (s, r, w) = (rule.nodes[i], rule.complements[i], rule.weights[i]);
            Ok(heat_apply(&source.eval(s)?, r)?.scale(w))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = SpectralField::zeros(source.grid(), source.components(), true);
    for term in &terms {
        acc = acc.add(term)?;
    }
    Ok(acc)
}
