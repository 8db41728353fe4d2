//! Nonlinear right-hand sides of the two complexified schemes.

use crate::error::{OscError, Result};
use crate::semigroup::{
    advect_values, biot_savart, dealiased_from_values, derivative_values, gradient, leray_project,
};
use crate::semigroup::pressure_pair_values;
use crate::spectral::{ComplexPair, SpectralField};

/// Tolerance for agreement between the explicit-pressure and the
/// Leray-projected form of the velocity nonlinearity.
pub const LERAY_CHECK_TOL: f64 = 1e-8;

fn combine(a: &[Vec<f64>], b: &[Vec<f64>], sign: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + sign * q).collect())
        .collect()
}

/// Advective parts `(U·∇)U − (V·∇)V` and `(U·∇)V + (V·∇)U`, dealiased.
fn velocity_advection(u: &SpectralField, v: &SpectralField) -> (SpectralField, SpectralField, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let g = *u.grid();
    let uv = u.to_real_values();
    let du = derivative_values(u);
    if v.is_zero() {
        let a = dealiased_from_values(g, advect_values(&uv, &du));
        let zero = SpectralField::zeros(g, u.components(), true);
        let vv = vec![vec![0.0; g.len()]; u.components()];
        return (a, zero, uv, vv);
    }
    let vv = v.to_real_values();
    let dv = derivative_values(v);
    let a = combine(&advect_values(&uv, &du), &advect_values(&vv, &dv), -1.0);
    let b = combine(&advect_values(&uv, &dv), &advect_values(&vv, &du), 1.0);
    (dealiased_from_values(g, a), dealiased_from_values(g, b), uv, vv)
}

/// `N_U = −[(U·∇)U − (V·∇)V] − ∇Π` and `N_V = −[(U·∇)V + (V·∇)U] − ∇R`,
/// without forcing.
pub fn velocity_nonlinearity(pair: &ComplexPair) -> Result<ComplexPair> {
    let (u, v) = (&pair.re, &pair.im);
    let g = *u.grid();
    let (a, b, uv, vv) = velocity_advection(u, v);
    let (pi, r) = if v.is_zero() {
        let (pi, _) = pressure_pair_values(g, &uv, &vv)?;
        (pi, SpectralField::zeros(g, 1, true))
    } else {
        pressure_pair_values(g, &uv, &vv)?
    };
    let nu = a.scale(-1.0).sub(&gradient(&pi)?)?;
    let nv = if v.is_zero() {
        SpectralField::zeros(g, u.components(), true)
    } else {
        b.scale(-1.0).sub(&gradient(&r)?)?
    };
    ComplexPair::new(nu, nv)
}

/// Same nonlinearity written as `−𝐏[(U·∇)U − (V·∇)V]`, `−𝐏[(U·∇)V + (V·∇)U]`.
pub fn velocity_nonlinearity_leray(pair: &ComplexPair) -> Result<ComplexPair> {
    let (a, b, _, _) = velocity_advection(&pair.re, &pair.im);
    ComplexPair::new(leray_project(&a)?.scale(-1.0), leray_project(&b)?.scale(-1.0))
}

/// Largest coefficient gap between the two forms, relative to the larger
/// of 1 and the size of the source.
pub fn leray_discrepancy(pair: &ComplexPair) -> Result<f64> {
    let explicit = velocity_nonlinearity(pair)?;
    let projected = velocity_nonlinearity_leray(pair)?;
    let gap = explicit
        .re
        .sub(&projected.re)?
        .max_coeff()
        .max(explicit.im.sub(&projected.im)?.max_coeff());
    let scale = explicit.re.max_coeff().max(explicit.im.max_coeff()).max(1.0);
    Ok(gap / scale)
}

pub fn check_leray(pair: &ComplexPair) -> Result<f64> {
    let gap = leray_discrepancy(pair)?;
    if gap > LERAY_CHECK_TOL {
        return Err(OscError::Divergence {
            iterate: 0,
            detail: format!("pressure and projection forms disagree by {gap:.3e}"),
        });
    }
    Ok(gap)
}

/// Velocities `(U, V) = (BS(W), BS(Z))`.
pub fn recovered_velocity(vorticity: &ComplexPair) -> Result<ComplexPair> {
    ComplexPair::new(biot_savart(&vorticity.re)?, biot_savart(&vorticity.im)?)
}

/// `N_W = (W·∇)U − (Z·∇)V − (U·∇)W + (V·∇)Z`,
/// `N_Z = (Z·∇)U + (W·∇)V − (V·∇)W − (U·∇)Z`, without forcing.
pub fn vorticity_nonlinearity(vorticity: &ComplexPair) -> Result<ComplexPair> {
    let (w, z) = (&vorticity.re, &vorticity.im);
    let g = *w.grid();
    let vel = recovered_velocity(vorticity)?;
    let (uv, du) = (vel.re.to_real_values(), derivative_values(&vel.re));
    let (wv, dw) = (w.to_real_values(), derivative_values(w));
    if z.is_zero() {
        let nw = combine(&advect_values(&wv, &du), &advect_values(&uv, &dw), -1.0);
        return ComplexPair::new(dealiased_from_values(g, nw), SpectralField::zeros(g, 3, true));
    }
    let (vv, dv) = (vel.im.to_real_values(), derivative_values(&vel.im));
    let (zv, dz) = (z.to_real_values(), derivative_values(z));
    let stretch_re = combine(&advect_values(&wv, &du), &advect_values(&zv, &dv), -1.0);
    let transport_re = combine(&advect_values(&uv, &dw), &advect_values(&vv, &dz), -1.0);
    let stretch_im = combine(&advect_values(&zv, &du), &advect_values(&wv, &dv), 1.0);
    let transport_im = combine(&advect_values(&vv, &dw), &advect_values(&uv, &dz), 1.0);
    ComplexPair::new(
        dealiased_from_values(g, combine(&stretch_re, &transport_re, -1.0)),
        dealiased_from_values(g, combine(&stretch_im, &transport_im, -1.0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::config::{taylor_green, white_band};
    use crate::semigroup::curl;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    fn random_pair(g: Grid, seed: u64, amp: f64) -> ComplexPair {
        let u = leray_project(&white_band(g, g.dim(), amp, 1.0, 5.0, seed)).unwrap();
        let v = leray_project(&white_band(g, g.dim(), amp, 1.0, 5.0, seed + 1)).unwrap();
        ComplexPair::new(u, v).unwrap()
    }

    #[test]
    fn pressure_form_equals_projection_form() {
        for (d, n) in [(2, 32), (3, 16)] {
            let g = Grid::new(d, n, 2.0 * PI).unwrap();
            for seed in 0..3 {
                let pair = random_pair(g, 10 * seed, 0.3);
                assert!(check_leray(&pair).unwrap() < 1e-12, "d={d} seed={seed}");
            }
        }
    }

    #[test]
    fn taylor_green_nonlinearity_vanishes() {
        // (u·∇)u is a pure gradient for this flow
        for d in [2, 3] {
            let g = Grid::new(d, 16, 2.0 * PI).unwrap();
            let u = taylor_green(g, 0.7);
            let n = velocity_nonlinearity(&ComplexPair::new(u, SpectralField::zeros(g, d, true)).unwrap()).unwrap();
            if d == 2 {
                assert!(n.re.max_coeff() < 1e-15, "{}", n.re.max_coeff());
            } else {
                assert!(n.re.max_coeff() > 1e-3);
            }
            assert!(n.im.is_zero());
        }
    }

    #[test]
    fn real_sector_matches_complex_product() {
        // (U+iV)·∇(U+iV) splits into the two advective combinations
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let pair = random_pair(g, 3, 0.5);
        let (a, b, _, _) = velocity_advection(&pair.re, &pair.im);
        let w = pair.re.to_complex_values();
        let z = pair.im.to_complex_values();
        let cplx: Vec<Vec<num_complex::Complex64>> = (0..2)
            .map(|c| (0..g.len()).map(|i| w[c][i] + num_complex::Complex64::i() * z[c][i]).collect())
            .collect();
        let field = SpectralField::from_complex_values(g, &cplx).unwrap();
        let vals = field.to_complex_values();
        let dvals: Vec<Vec<Vec<num_complex::Complex64>>> =
            (0..2).map(|j| crate::semigroup::partial(&field, j).to_complex_values()).collect();
        let adv: Vec<Vec<num_complex::Complex64>> = (0..2)
            .map(|c| (0..g.len()).map(|p| vals[0][p] * dvals[0][c][p] + vals[1][p] * dvals[1][c][p]).collect())
            .collect();
        let expect = SpectralField::from_complex_values(g, &adv).unwrap().dealiased();
        let got = ComplexPair::new(a, b).unwrap().combined();
        assert!(expect.sub(&got).unwrap().max_coeff() < 1e-13);
    }

    #[test]
    fn vorticity_source_is_curl_of_velocity_source() {
        let g = Grid::new(3, 16, 2.0 * PI).unwrap();
        let pair = random_pair(g, 5, 0.2);
        let nv = velocity_nonlinearity(&pair).unwrap();
        let omega = ComplexPair::new(curl(&pair.re).unwrap(), curl(&pair.im).unwrap()).unwrap();
        let nw = vorticity_nonlinearity(&omega).unwrap();
        let scale = nw.re.max_coeff();
        assert!(curl(&nv.re).unwrap().sub(&nw.re).unwrap().max_coeff() < 1e-12 * scale.max(1.0));
        assert!(curl(&nv.im).unwrap().sub(&nw.im).unwrap().max_coeff() < 1e-12 * scale.max(1.0));
    }
}
