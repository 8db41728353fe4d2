//! Heat-type smoothing of `|Tf|^k` for Calderón–Zygmund operators `T`,
//! its three-piece decomposition, the `L^∞ → ψ_*(L)` bound on cube pairs
//! and the spherical cancellation of the kernels.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{CorpusMember, TestCorpus};
use super::report::{BoundReport, Check};
use crate::error::{OscError, Result};
use crate::semigroup::{biot_savart, partial};
use crate::spaces::orlicz::orlicz_of_values;
use crate::spaces::{OrliczDomain, OrliczSpec};
use crate::spectral::{Grid, SpectralField};
use crate::weights::log_weight;

pub const CZ_T_LIST: [f64; 3] = [0.3, 0.1, 0.03];
pub const CZ_POWERS: [u32; 2] = [1, 2];
pub const CZ_P: [f64; 2] = [1.0, 2.0];
/// Ball radius as a fraction of the period.
pub const BALL_FRACTION: f64 = 0.125;
/// Random evaluation points for the pieces (the maximisers are added).
pub const RANDOM_POINTS: usize = 15;
pub const DOMINATION_TOL: f64 = 1e-10;
pub const CANCELLATION_TOL: f64 = 1e-8;
/// Step of the exponent grid searched for the mixed term.
pub const ALPHA_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CzOperator {
    /// `R₁R₂`, symbol `−k₁k₂/|k|²`.
    RieszProduct,
    /// `R₁² − R₂²`, symbol `(k₂² − k₁²)/|k|²`.
    RieszDifference,
    /// `f ↦ ∂₂(BS(f e₃))₂`, one entry of the gradient of Biot–Savart.
    BiotSavartGradient,
}

impl CzOperator {
    pub fn for_dim(dim: usize) -> Vec<CzOperator> {
        match dim {
            2 => vec![CzOperator::RieszProduct, CzOperator::RieszDifference],
            _ => vec![CzOperator::BiotSavartGradient],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CzOperator::RieszProduct => "riesz-product",
            CzOperator::RieszDifference => "riesz-difference",
            CzOperator::BiotSavartGradient => "biot-savart-gradient",
        }
    }

    /// `Tf` for a scalar field.
    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        let g = *f.grid();
        let riesz = |i: usize, a: usize, b: usize| {
            let k2 = g.k_squared(i);
            if k2 == 0.0 {
                return 0.0;
            }
            let k = g.deriv_wavevector(i);
            -k[a] * k[b] / k2
        };
        match self {
            CzOperator::RieszProduct => Ok(f.apply_symbol(|i| Complex64::new(riesz(i, 0, 1), 0.0))),
            CzOperator::RieszDifference => {
                Ok(f.apply_symbol(|i| Complex64::new(riesz(i, 0, 0) - riesz(i, 1, 1), 0.0)))
            }
            CzOperator::BiotSavartGradient => {
                if g.dim() != 3 {
                    return Err(OscError::InvalidParameter("Biot–Savart gradient needs d = 3".into()));
                }
                let zero = SpectralField::zeros(g, 1, true);
                let w = SpectralField::stack(&[zero.clone(), zero, f.clone()])?;
                Ok(partial(&biot_savart(&w)?.component(1), 1))
            }
        }
    }

    /// Angular profile of the convolution kernel on the unit sphere.
    pub fn kernel(&self, z: &[f64; 3]) -> f64 {
        match self {
            CzOperator::RieszProduct | CzOperator::BiotSavartGradient => z[0] * z[1],
            CzOperator::RieszDifference => z[0] * z[0] - z[1] * z[1],
        }
    }
}

/// Lebedev rule with 50 nodes (exact to degree 11); weights sum to 1.
pub fn lebedev50() -> Vec<([f64; 3], f64)> {
    let mut out = Vec::with_capacity(50);
    let signs = |v: [f64; 3], w: f64, out: &mut Vec<([f64; 3], f64)>| {
        let mut seen: Vec<[f64; 3]> = Vec::new();
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    let p = [sx * v[0], sy * v[1], sz * v[2]];
                    if !seen.contains(&p) {
                        seen.push(p);
                        out.push((p, w));
                    }
                }
            }
        }
    };
    for a in 0..3 {
        let mut v = [0.0; 3];
        v[a] = 1.0;
        signs(v, 0.012_698_412_698_412_698, &mut out);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for v in [[0.0, h, h], [h, 0.0, h], [h, h, 0.0]] {
        signs(v, 0.022_574_955_908_289_243, &mut out);
    }
    let c = 1.0 / 3f64.sqrt();
    signs([c, c, c], 0.021_093_75, &mut out);
    let (l, m) = (1.0 / 11f64.sqrt(), 3.0 / 11f64.sqrt());
    for v in [[l, l, m], [l, m, l], [m, l, l]] {
        signs(v, 0.020_173_335_537_918_871, &mut out);
    }
    out
}

/// `n` equally spaced angles on the unit circle, weights `1/n`.
pub fn circle_rule(n: usize) -> Vec<([f64; 3], f64)> {
    (0..n)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / n as f64;
            ([th.cos(), th.sin(), 0.0], 1.0 / n as f64)
        })
        .collect()
}

pub fn sphere_rule(dim: usize) -> Vec<([f64; 3], f64)> {
    match dim {
        2 => circle_rule(64),
        _ => lebedev50(),
    }
}

/// Normalised sphere average `⨍ f dσ` by the rule.
pub fn sphere_mean(rule: &[([f64; 3], f64)], f: impl Fn(&[f64; 3]) -> f64) -> f64 {
    rule.iter().map(|(z, w)| w * f(z)).sum()
}

/// Cancellation residual `|⨍_{S} K dσ|` for each operator on `dim`.
pub fn cancellation_checks(dim: usize) -> Vec<Check> {
    let rule = sphere_rule(dim);
    CzOperator::for_dim(dim)
        .into_iter()
        .map(|op| {
            let v = sphere_mean(&rule, |z| op.kernel(z)).abs();
            Check::new(format!("cancellation-{}", op.label()), v, CANCELLATION_TOL)
        })
        .collect()
}

/// Minimal-image displacement of grid index `i` along each axis.
fn displacement(grid: &Grid, i: usize) -> [f64; 3] {
    let n = grid.n();
    let h = grid.spacing();
    let idx = grid.indices(i);
    let mut y = [0.0; 3];
    for a in 0..grid.dim() {
        let s = if idx[a] > n / 2 { idx[a] as f64 - n as f64 } else { idx[a] as f64 };
        y[a] = s * h;
    }
    y
}

fn radius(y: &[f64; 3]) -> f64 {
    (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt()
}

/// Cell integrals of `g_t(y) = t^{−d}e^{−|y/t|²}` around each displacement.
pub fn gaussian_weights(grid: &Grid, t: f64) -> Vec<f64> {
    let h = grid.spacing();
    let axis = |y: f64| 0.5 * PI.sqrt() * (libm::erf((y + 0.5 * h) / t) - libm::erf((y - 0.5 * h) / t));
    (0..grid.len())
        .map(|i| {
            let y = displacement(grid, i);
            (0..grid.dim()).map(|a| axis(y[a])).product()
        })
        .collect()
}

/// `Σ_y w(y) h(x − y)` for every `x`, through the transform.
pub fn periodic_convolution(grid: &Grid, weights: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let w = SpectralField::from_real_values(*grid, &[weights.to_vec()])?;
    let v = SpectralField::from_real_values(*grid, &[values.to_vec()])?;
    let scale = grid.len() as f64;
    let prod: Vec<Complex64> = w.coeffs(0).iter().zip(v.coeffs(0)).map(|(a, b)| a * b * scale).collect();
    let out = SpectralField::from_coefficients(*grid, vec![prod], true)?;
    Ok(out.to_real_values().remove(0))
}

/// Grid index of `x − y`.
fn minus(grid: &Grid, x: usize, y: usize) -> usize {
    let n = grid.n();
    let (a, b) = (grid.indices(x), grid.indices(y));
    grid.flat([(a[0] + n - b[0]) % n, (a[1] + n - b[1]) % n, (a[2] + n - b[2]) % n])
}

/// The three pieces and the full value at one point, for one `(t, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pieces {
    pub full: f64,
    pub h: f64,
    pub i: f64,
    pub j: f64,
}

/// Values needed for the pieces at one evaluation point `x`: `T(f_x 1_{3B})`
/// on the grid of displacements, and `Tf(x − y)`.
struct PointData {
    near: Vec<f64>,
    shifted: Vec<f64>,
}

fn point_data(op: CzOperator, f_vals: &[f64], tf_vals: &[f64], grid: &Grid, x: usize, r_ball: f64) -> Result<PointData> {
    let mut local = vec![0.0; grid.len()];
    let mut shifted = vec![0.0; grid.len()];
    for (y, (l, s)) in local.iter_mut().zip(shifted.iter_mut()).enumerate() {
        let src = minus(grid, x, y);
        *s = tf_vals[src];
        if radius(&displacement(grid, y)) < 3.0 * r_ball {
            *l = f_vals[src];
        }
    }
    let near = op.apply(&SpectralField::from_real_values(*grid, &[local])?)?.to_real_values().remove(0);
    Ok(PointData { near, shifted })
}

fn pieces(grid: &Grid, data: &PointData, weights: &[f64], in_ball: &[f64], k: u32) -> Pieces {
    let mut p = Pieces { full: 0.0, h: 0.0, i: 0.0, j: 0.0 };
    for y in 0..grid.len() {
        let w = weights[y];
        let whole = data.shifted[y].abs().powi(k as i32);
        p.full += w * whole;
        let inside = w * in_ball[y];
        if inside > 0.0 {
            p.i += inside * (data.shifted[y] - data.near[y]).abs().powi(k as i32);
            p.j += inside * data.near[y].abs().powi(k as i32);
        }
        p.h += (w - inside) * whole;
    }
    p
}

/// Share of each cell's `g_t` mass inside the ball of radius `r`, by
/// subcell sampling near the sphere. `t = ∞` gives the area fraction.
pub fn ball_fraction(grid: &Grid, r: f64, t: f64) -> Vec<f64> {
    const SUB: usize = 8;
    let h = grid.spacing();
    let dim = grid.dim();
    let reach = 0.5 * h * (dim as f64).sqrt();
    let offsets: Vec<f64> = (0..SUB).map(|s| ((s as f64 + 0.5) / SUB as f64 - 0.5) * h).collect();
    let total = SUB.pow(dim as u32);
    (0..grid.len())
        .map(|i| {
            let y = displacement(grid, i);
            let d = radius(&y);
            if d + reach <= r {
                return 1.0;
            }
            if d - reach >= r {
                return 0.0;
            }
            let (mut inside, mut all) = (0.0, 0.0);
            for s in 0..total {
                let mut q = 0.0;
                let mut rest = s;
                for a in 0..dim {
                    let z = y[a] + offsets[rest % SUB];
                    rest /= SUB;
                    q += z * z;
                }
                let w = (-q / (t * t)).exp();
                all += w;
                if q < r * r {
                    inside += w;
                }
            }
            if all > 0.0 { inside / all } else { 0.0 }
        })
        .collect()
}

/// The dilated ball `3B` must fit inside one period.
pub fn check_ball(grid: &Grid, r_ball: f64) -> Result<()> {
    if !(r_ball > 0.0 && 3.0 * r_ball < 0.5 * grid.length()) {
        return Err(OscError::Config(format!(
            "ball radius {r_ball} needs 0 < 3r < L/2 = {}",
            0.5 * grid.length()
        )));
    }
    Ok(())
}

/// Per-member measurements feeding the reports.
struct MemberRun {
    name: String,
    linf: f64,
    lp: [f64; 2],
    /// `(op, t, k, sup_x g_t*|Tf|^k)`
    totals: Vec<(CzOperator, f64, u32, f64)>,
    /// `(op, t, k, max over points of each piece, worst domination defect)`
    pieces: Vec<(CzOperator, f64, u32, Pieces, f64)>,
    /// `(op, label, ‖T(g1_{S₁})‖_{ψ_*(S₂)}, ‖g‖_{L^∞(S₁)})`
    corollary: Vec<(CzOperator, String, f64, f64)>,
}

fn cube_pairs(grid: &Grid, seed: u64) -> Vec<(usize, [usize; 3], usize, [usize; 3])> {
    let n = grid.n();
    let sides = [n / 8, n / 16];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &s1 in &sides {
        for &s2 in &sides {
            for _ in 0..3 {
                let mut o1 = [0usize; 3];
                let mut o2 = [0usize; 3];
                for a in 0..grid.dim() {
                    o1[a] = rng.gen_range(0..16) * n / 16;
                    o2[a] = rng.gen_range(0..16) * n / 16;
                }
                out.push((s1, o1, s2, o2));
            }
        }
    }
    out
}

fn run_member(m: &CorpusMember, ops: &[CzOperator], t_list: &[f64], weights: &[Vec<f64>], seed: u64) -> Result<MemberRun> {
    let grid = *m.field.grid();
    let r_ball = BALL_FRACTION * grid.length();
    let in_ball: Vec<Vec<f64>> = t_list.iter().map(|&t| ball_fraction(&grid, r_ball, t)).collect();
    let f_vals = m.field.to_real_values().remove(0);
    let psi = OrliczSpec::psi_star();
    let mut run = MemberRun {
        name: m.name.clone(),
        linf: m.norms.linf,
        lp: [m.lp(1.0), m.lp(2.0)],
        totals: Vec::new(),
        pieces: Vec::new(),
        corollary: Vec::new(),
    };
    for &op in ops {
        let tf_vals = op.apply(&m.field)?.to_real_values().remove(0);
        let mut points: Vec<usize> = Vec::new();
        let mut conv_max = Vec::new();
        for (ti, &t) in t_list.iter().enumerate() {
            for &k in &CZ_POWERS {
                let powered: Vec<f64> = tf_vals.iter().map(|v| v.abs().powi(k as i32)).collect();
                let conv = periodic_convolution(&grid, &weights[ti], &powered)?;
                let (arg, top) = conv
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
                run.totals.push((op, t, k, top.max(0.0)));
                conv_max.push(top.max(0.0));
                if !points.contains(&arg) {
                    points.push(arg);
                }
            }
        }
        // lattice points, so the same physical points are probed at every resolution
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = grid.n();
        for _ in 0..RANDOM_POINTS {
            let mut idx = [0usize; 3];
            for a in idx.iter_mut().take(grid.dim()) {
                *a = rng.gen_range(0..16) * n / 16;
            }
            let x = grid.flat(idx);
            if !points.contains(&x) {
                points.push(x);
            }
        }
        let data = points
            .iter()
            .map(|&x| point_data(op, &f_vals, &tf_vals, &grid, x, r_ball))
            .collect::<Result<Vec<_>>>()?;
        let mut slot = 0;
        for (ti, &t) in t_list.iter().enumerate() {
            for &k in &CZ_POWERS {
                let mut best = Pieces { full: 0.0, h: 0.0, i: 0.0, j: 0.0 };
                let mut defect = 0.0f64;
                let factor = 2f64.powi(k as i32 - 1);
                for d in &data {
                    let p = pieces(&grid, d, &weights[ti], &in_ball[ti], k);
                    best.full = best.full.max(p.full);
                    best.h = best.h.max(p.h);
                    best.i = best.i.max(p.i);
                    best.j = best.j.max(p.j);
                    let scale = conv_max[slot].max(f64::MIN_POSITIVE);
                    defect = defect.max((p.full - p.h - factor * (p.i + p.j)) / scale);
                }
                run.pieces.push((op, t, k, best, defect.max(0.0)));
                slot += 1;
            }
        }
        for (s1, o1, s2, o2) in cube_pairs(&grid, seed ^ 0x5eed) {
            let mask = OrliczDomain::Cube { origin: o1, side: s1 }.mask(&grid);
            let restricted: Vec<f64> = f_vals.iter().zip(&mask).map(|(v, &inside)| if inside { *v } else { 0.0 }).collect();
            let g_sup = restricted.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let tg = op.apply(&SpectralField::from_real_values(grid, &[restricted])?)?;
            let mags: Vec<f64> = tg.to_real_values().remove(0).into_iter().map(f64::abs).collect();
            let norm = orlicz_of_values(&grid, &mags, &psi, OrliczDomain::Cube { origin: o2, side: s2 })?;
            let label = format!("S1={s1}@{:?} S2={s2}@{:?}", &o1[..grid.dim()], &o2[..grid.dim()]);
            run.corollary.push((op, label.replace(',', ";"), norm, g_sup));
        }
    }
    Ok(run)
}

pub fn cz_ids(dim: usize) -> Vec<String> {
    let suffix = if dim == 3 { "-3d" } else { "" };
    ["cz-orlicz-k1", "cz-orlicz-k2", "cz-piece-h", "cz-piece-i", "cz-piece-j", "cz-corollary"]
        .iter()
        .map(|s| format!("{s}{suffix}"))
        .collect()
}

/// Reports, in [`cz_ids`] order: the smoothed bound for `k = 1, 2` (with
/// the best mixed-term exponent), the three pieces, and the corollary.
/// The first report carries the cancellation and domination checks.
pub fn verify_cz_orlicz(corpus: &TestCorpus, t_list: &[f64]) -> Result<Vec<BoundReport>> {
    let grid = corpus.grid;
    let dim = grid.dim();
    let r_ball = BALL_FRACTION * grid.length();
    check_ball(&grid, r_ball)?;
    let ops = CzOperator::for_dim(dim);
    let weights: Vec<Vec<f64>> = t_list.iter().map(|&t| gaussian_weights(&grid, t)).collect();
    let runs = corpus
        .members
        .par_iter()
        .map(|m| run_member(m, &ops, t_list, &weights, corpus.seed))
        .collect::<Result<Vec<_>>>()?;
    let ids = cz_ids(dim);
    let mut reports: Vec<BoundReport> = ids.iter().map(BoundReport::new).collect();

    for (slot, &k) in CZ_POWERS.iter().enumerate() {
        let kf = k as f64;
        let denominator = |run: &MemberRun, pi: usize, t: f64, alpha: f64| {
            let (a, b) = (run.linf, run.lp[pi]);
            log_weight(t).powf(kf) * (a.powf(kf) + b.powf(kf) + a.powf(kf * alpha) * b.powf(kf * (1.0 - alpha)))
        };
        let worst = |alpha: f64| {
            let mut top = 0.0f64;
            for run in &runs {
                for &(_, t, kk, lhs) in &run.totals {
                    if kk != k {
                        continue;
                    }
                    for pi in 0..CZ_P.len() {
                        let d = denominator(run, pi, t, alpha);
                        if d > 0.0 {
                            top = top.max(lhs / d);
                        }
                    }
                }
            }
            top
        };
        let best_alpha = (0..=ALPHA_STEPS)
            .map(|i| i as f64 / ALPHA_STEPS as f64)
            .min_by(|a, b| worst(*a).total_cmp(&worst(*b)))
            .expect("nonempty grid");
        let r = &mut reports[slot];
        r.notes.insert("best_alpha".into(), best_alpha);
        for run in &runs {
            for &(op, t, kk, lhs) in &run.totals {
                if kk != k {
                    continue;
                }
                for (pi, &p) in CZ_P.iter().enumerate() {
                    let label = format!("{} k={k} p={p} alpha={best_alpha}", op.label());
                    r.push(&run.name, t, label, lhs, denominator(run, pi, t, best_alpha), run.linf);
                }
            }
        }
    }

    let mut worst_defect = 0.0f64;
    for run in &runs {
        for &(op, t, k, p, defect) in &run.pieces {
            worst_defect = worst_defect.max(defect);
            let kf = k as f64;
            let a = run.linf;
            for (pi, &pp) in CZ_P.iter().enumerate() {
                let b = run.lp[pi];
                let label = format!("{} k={k} p={pp}", op.label());
                reports[2].push(&run.name, t, label.clone(), p.h, a.powf(kf) + b.powf(kf), run.linf);
                let i_rhs = (a + r_ball.powf(-(dim as f64) / pp) * b).powf(kf);
                reports[3].push(&run.name, t, label, p.i, i_rhs, run.linf);
            }
            let label = format!("{} k={k}", op.label());
            reports[4].push(&run.name, t, label, p.j, log_weight(t).powf(kf) * a.powf(kf), run.linf);
        }
        for (op, label, norm, g_sup) in &run.corollary {
            reports[5].push(&run.name, 0.0, format!("{} {label}", op.label()), *norm, *g_sup, run.linf);
        }
    }
    reports[0].checks.extend(cancellation_checks(dim));
    reports[0].checks.push(Check::new("domination", worst_defect, DOMINATION_TOL));
    reports[0].notes.insert("ball_radius".into(), r_ball);
    reports[0].notes.insert("gaussian_l1".into(), PI.powf(0.5 * dim as f64));
    Ok(reports)
}
