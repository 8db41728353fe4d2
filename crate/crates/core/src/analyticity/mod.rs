//! Analyticity radius from Fourier shell decay, and norms of the complex
//! extension over strips `|y| ≤ r`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};
use crate::spaces::bmo_of_values;
use crate::spaces::lp::magnitudes;
use crate::spectral::{evaluate_complex_shift, ComplexPair, SpectralField};
use crate::weights::big_phi2;

/// Shells with `a_j` below this fraction of the largest are at round-off.
pub const ROUND_OFF: f64 = 1e-14;
/// Slack for the monotonicity test of `δ̂(t)`.
pub const MONOTONE_SLACK: f64 = 0.15;
/// Random directions added to the axis directions in the domain probe.
pub const RANDOM_DIRECTIONS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub t: f64,
    /// `δ̂ = −slope`, clamped at 0.
    pub radius: f64,
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the fit residual over the range of `ln a_j`.
    pub residual: f64,
    pub shells_used: usize,
    /// Top shells sit at the round-off floor.
    pub saturated: bool,
    /// `ln(1/ROUND_OFF)/k_top`: steepest decay the grid can express.
    pub max_resolvable: f64,
    /// Fewer than three usable shells.
    pub indeterminate: bool,
}

/// Shell maxima `a_j = max_{|k| ∈ shell j} |f̂(k)|` over all components;
/// shell `j` holds integer frequencies with `round(|n|) = j`.
pub fn shell_maxima(f: &SpectralField) -> Vec<f64> {
    let g = f.grid();
    let mut shells = Vec::new();
    for i in 0..g.len() {
        let n = g.freq(i);
        let j = (((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64).sqrt()).round() as usize;
        if shells.len() <= j {
            shells.resize(j + 1, 0.0);
        }
        let a = f.all_coeffs().iter().map(|c| c[i].norm()).fold(0.0, f64::max);
        shells[j] = f64::max(shells[j], a);
    }
    shells
}

/// Largest `|n_i|` over the nonzero coefficients.
fn support_half_width(f: &SpectralField) -> i64 {
    let g = f.grid();
    (0..g.len())
        .filter(|&i| f.all_coeffs().iter().any(|c| c[i].norm() > 0.0))
        .map(|i| g.freq(i).iter().map(|v| v.abs()).max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `ln a_j ≈ −δ|k_j| + b` over the shells above round-off, mean
/// excluded.
pub fn estimate_radius(f: &SpectralField, t: f64) -> Result<RadiusEstimate> {
    if f.is_zero() {
        return Err(OscError::InvalidParameter("radius of a zero field is undefined".into()));
    }
    let dk = f.grid().dk();
    let all = shell_maxima(f);
    let top = all.iter().skip(1).copied().fold(0.0, f64::max);
    let floor = ROUND_OFF * top;
    let k_top = (all.len() - 1) as f64 * dk;
    let max_resolvable = (1.0 / ROUND_OFF).ln() / k_top;
    let decade = ((all.len() - 1) / 10).max(1);
    let saturated = top > 0.0 && all[all.len() - decade..].iter().all(|&a| a < floor);
    // fit only shells whose whole sphere lies inside the cube of nonzero
    // coefficients; corner shells are only partly populated
    let keep = (support_half_width(f) as f64 - 0.5).floor().max(0.0) as usize + 1;
    let shells = &all[..keep.min(all.len())];
    let used: Vec<usize> = (1..shells.len()).filter(|&j| top > 0.0 && shells[j] >= floor).collect();
    if used.len() < 3 {
        return Ok(RadiusEstimate {
            t,
            radius: 0.0,
            slope: 0.0,
            intercept: 0.0,
            residual: 0.0,
            shells_used: used.len(),
            saturated,
            max_resolvable,
            indeterminate: true,
        });
    }
    let x: Vec<f64> = used.iter().map(|&j| j as f64 * dk).collect();
    let y: Vec<f64> = used.iter().map(|&j| shells[j].ln()).collect();
    let (slope, intercept) = linear_fit(&x, &y);
    let rms = (x.iter().zip(&y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    let range = y.iter().copied().fold(f64::NEG_INFINITY, f64::max) - y.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RadiusEstimate {
        t,
        radius: (-slope).max(0.0),
        slope,
        intercept,
        residual: if range > 0.0 { rms / range } else { 0.0 },
        shells_used: used.len(),
        saturated,
        max_resolvable,
        indeterminate: false,
    })
}

/// Outcome of the radius checks over a run's probe times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrowth {
    /// `min_t δ̂(t)/(t^{1/2}Φ₂(t))`.
    pub c_fit: f64,
    /// `δ̂(t_{i+1}) ≥ (1 − slack)δ̂(t_i)` for all consecutive probes.
    pub nondecreasing: bool,
    pub max_residual: f64,
    pub lower_bound_holds: bool,
}

pub fn radius_growth(estimates: &[RadiusEstimate]) -> Result<RadiusGrowth> {
    let mut c_fit = f64::INFINITY;
    for e in estimates {
        c_fit = c_fit.min(e.radius / (e.t.sqrt() * big_phi2(e.t)?));
    }
    let nondecreasing = estimates.windows(2).all(|w| w[1].radius >= (1.0 - MONOTONE_SLACK) * w[0].radius);
    let lower_bound_holds = c_fit > 0.0
        && estimates.iter().all(|e| !e.indeterminate)
        && estimates.iter().all(|e| e.radius >= c_fit * e.t.sqrt() * big_phi2(e.t).unwrap_or(f64::INFINITY) * (1.0 - 1e-12));
    Ok(RadiusGrowth {
        c_fit,
        nondecreasing,
        max_residual: estimates.iter().map(|e| e.residual).fold(0.0, f64::max),
        lower_bound_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainNormRow {
    pub t: f64,
    pub radius: f64,
    pub direction: Vec<f64>,
    pub bmo_re: f64,
    pub bmo_im: f64,
    pub linf_re: f64,
    pub linf_im: f64,
    pub overflow: bool,
}

/// `±e_i` followed by `RANDOM_DIRECTIONS` seeded random unit vectors.
pub fn probe_directions(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            dirs.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < 2 * dim + RANDOM_DIRECTIONS {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            dirs.push(v.iter().map(|a| a / n).collect());
        }
    }
    dirs
}

/// Norms of the real and imaginary parts of `(U + iV)(x + iy)` for
/// `y = r·e` over the given radii and the probe directions.
pub fn probe_domain_norms(pair: &ComplexPair, t: f64, radii: &[f64], seed: u64) -> Result<Vec<DomainNormRow>> {
    let g = *pair.grid();
    let combined = pair.combined();
    let dirs = probe_directions(g.dim(), seed);
    let jobs: Vec<(f64, Vec<f64>)> = radii
        .iter()
        .flat_map(|&r| dirs.iter().map(move |e| (r, e.clone())))
        .collect();
    jobs.par_iter()
        .map(|(r, e)| {
            let y: Vec<f64> = e.iter().map(|a| a * r).collect();
            let shifted = evaluate_complex_shift(&combined, &y)?;
            if shifted.overflow {
                log::warn!("shift |y| = {r} overflows; excluded");
                let inf = f64::INFINITY;
                return Ok(DomainNormRow {
                    t,
                    radius: *r,
                    direction: e.clone(),
                    bmo_re: inf,
                    bmo_im: inf,
                    linf_re: inf,
                    linf_im: inf,
                    overflow: true,
                });
            }
            let re: Vec<Vec<f64>> = shifted.values.iter().map(|c| c.iter().map(|z| z.re).collect()).collect();
            let im: Vec<Vec<f64>> = shifted.values.iter().map(|c| c.iter().map(|z| z.im).collect()).collect();
            let sup = |v: &[Vec<f64>]| magnitudes(v).into_iter().fold(0.0, f64::max);
            Ok(DomainNormRow {
                t,
                radius: *r,
                direction: e.clone(),
                bmo_re: bmo_of_values(&g, &re, true),
                bmo_im: bmo_of_values(&g, &im, true),
                linf_re: sup(&re),
                linf_im: sup(&im),
                overflow: false,
            })
        })
        .collect()
}

/// Largest `linf_re + linf_im` over the rows that did not overflow.
pub fn domain_linf_sup(rows: &[DomainNormRow]) -> f64 {
    rows.iter()
        .filter(|r| !r.overflow)
        .map(|r| r.linf_re + r.linf_im)
        .fold(0.0, f64::max)
}

pub const RADIUS_CSV_HEADER: &str = "t,radius,c_fit,saturated,slope,intercept,residual,shells_used,indeterminate";
pub const DOMAIN_CSV_HEADER: &str = "t,radius,direction,bmo_re,bmo_im,linf_re,linf_im,overflow";

pub fn radius_csv(estimates: &[RadiusEstimate], c_fit: f64) -> String {
    let mut out = String::from(RADIUS_CSV_HEADER);
    out.push('\n');
    for e in estimates {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{},{}\n",
            e.t, e.radius, c_fit, e.saturated, e.slope, e.intercept, e.residual, e.shells_used, e.indeterminate
        ));
    }
    out
}

pub fn domain_csv(rows: &[DomainNormRow]) -> String {
    let mut out = String::from(DOMAIN_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let dir: Vec<String> = r.direction.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&format!(
            "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.t,
            r.radius,
            dir.join(" "),
            r.bmo_re,
            r.bmo_im,
            r.linf_re,
            r.linf_im,
            r.overflow
        ));
    }
    out
}
