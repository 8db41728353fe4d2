//! Seeded family of scalar test fields standing in for "all f".
//!
//! Members are defined in physical units so that the same member on grids
//! `N` and `2N` differs only by modes the coarse grid cannot hold. Sampled
//! (non band-limited) members are taken on a fine reference grid, truncated
//! to the target grid and smoothed by `e^{τ₀Δ}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};
use crate::semigroup::heat_apply;
use crate::spaces::NormReport;
use crate::spectral::{Grid, SpectralField};

/// Smoothing time applied to sampled members.
pub const REGULARISATION_TIME: f64 = 0.02;
/// Reference resolution of sampled members (at least `2N` is used).
pub const REFERENCE_N_2D: usize = 256;
pub const REFERENCE_N_3D: usize = 64;
/// Exponents of the `L^p` norms stored with each member.
pub const CORPUS_P: [f64; 2] = [1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Constant,
    SingleMode,
    RandomBand,
    WhiteBand,
    TruncatedLog,
    SmoothedIndicator,
    Smooth,
}

#[derive(Debug, Clone)]
pub struct CorpusMember {
    pub name: String,
    pub family: Family,
    pub field: SpectralField,
    pub norms: NormReport,
}

impl CorpusMember {
    /// `‖f‖_{L^p}` for one of [`CORPUS_P`].
    pub fn lp(&self, p: f64) -> f64 {
        self.norms
            .lp
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, v)| *v)
            .expect("corpus exponent")
    }
}

#[derive(Debug, Clone)]
pub struct TestCorpus {
    pub grid: Grid,
    pub seed: u64,
    pub members: Vec<CorpusMember>,
}

enum Recipe {
    Exact(Box<dyn Fn(Grid) -> SpectralField + Send + Sync>),
    Sampled(Box<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>),
}

fn periodic_offset(x: f64, c: f64, l: f64) -> f64 {
    (x - c + 1.5 * l).rem_euclid(l) - 0.5 * l
}

fn distance(x: &[f64; 3], c: &[f64; 3], dim: usize, l: f64) -> f64 {
    (0..dim)
        .map(|a| periodic_offset(x[a], c[a], l).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Adds the real mode `Re(z e^{i n·x})`.
fn put_mode(f: &mut SpectralField, freq: [i64; 3], z: Complex64) {
    let g = *f.grid();
    let ip = g.flat_of_freq(freq);
    let im = g.flat_of_freq([-freq[0], -freq[1], -freq[2]]);
    let c = f.coeffs_mut(0);
    if ip == im {
        c[ip] += Complex64::new(z.re, 0.0);
    } else {
        c[ip] += 0.5 * z;
        c[im] += 0.5 * z.conj();
    }
}

fn cosine(grid: Grid, freq: [i64; 3], phase: f64) -> SpectralField {
    let mut f = SpectralField::zeros(grid, 1, true);
    put_mode(&mut f, freq, Complex64::from_polar(1.0, phase));
    f
}

/// Random field on integer shells `k_min ≤ |n| ≤ k_max`. Frequencies are
/// visited in a fixed lexicographic order so the draw is grid independent.
/// `decay` multiplies amplitudes by `|n|^{-decay}`.
fn band(grid: Grid, k_min: f64, k_max: f64, decay: f64, seed: u64, gaussian: bool) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid, 1, true);
    let d = grid.dim();
    let m = k_max.floor() as i64;
    let span: Vec<i64> = (-m..=m).collect();
    let third: &[i64] = if d == 3 { &span } else { &[0] };
    for &a in &span {
        for &b in &span {
            for &c in third {
                let n = [a, b, c];
                let r = ((a * a + b * b + c * c) as f64).sqrt();
                let amp = if gaussian {
                    let (u, v): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    Complex64::new(u, v)
                } else {
                    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
                };
                // one draw per ± pair, taken at the lexicographically positive member
                let positive = n.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0);
                if positive && r >= k_min && r <= k_max {
                    put_mode(&mut f, n, amp * r.powf(-decay));
                }
            }
        }
    }
    f
}

fn recipes(dim: usize, l: f64, seed: u64) -> Vec<(String, Family, Recipe)> {
    let mut out: Vec<(String, Family, Recipe)> = Vec::new();
    let last = dim - 1;
    let center = [0.5 * l; 3];
    let kx = std::f64::consts::TAU / l;

    out.push(("constant".into(), Family::Constant, Recipe::Sampled(Box::new(|_| 1.0))));
    out.push((
        "constant-plus-mode".into(),
        Family::Smooth,
        Recipe::Exact(Box::new(move |g| {
            let mut f = cosine(g, [1, 1, if dim == 3 { 1 } else { 0 }], -0.5 * std::f64::consts::PI);
            f.coeffs_mut(0)[0] += Complex64::new(2.0, 0.0);
            f
        })),
    ));
    for m in [1i64, 2, 4, 8, 16] {
        out.push((
            format!("mode-{m}"),
            Family::SingleMode,
            Recipe::Exact(Box::new(move |g| cosine(g, [m, 0, 0], 0.0))),
        ));
    }
    out.push((
        "mode-3-4".into(),
        Family::SingleMode,
        Recipe::Exact(Box::new(|g| cosine(g, [3, 4, 0], 0.3))),
    ));
    out.push((
        "mode-product-1-7".into(),
        Family::Smooth,
        Recipe::Exact(Box::new(move |g| {
            let mut q = [0i64; 3];
            q[last] = 7;
            // cos x cos 7y = ½cos(x + 7y) + ½cos(x − 7y)
            let a = cosine(g, [1 + q[0], q[1], q[2]], 0.0);
            let b = cosine(g, [1 - q[0], -q[1], -q[2]], 0.0);
            a.add(&b).expect("same grid").scale(0.5)
        })),
    ));
    out.push((
        "mode-sum-2-9".into(),
        Family::Smooth,
        Recipe::Exact(Box::new(move |g| {
            let mut q = [0i64; 3];
            q[last] = 9;
            cosine(g, [2, 0, 0], -0.5 * std::f64::consts::PI)
                .add(&cosine(g, q, 0.0).scale(0.5))
                .expect("same grid")
        })),
    ));
    let mut idx = 0u64;
    let mut next_seed = || {
        idx += 1;
        seed.wrapping_add(idx.wrapping_mul(7919))
    };
    for (lo, hi) in [(1.0, 3.0), (1.0, 6.0), (2.0, 8.0), (4.0, 12.0)] {
        for copy in 0..2 {
            let s = next_seed();
            out.push((
                format!("band-{lo}-{hi}-{copy}"),
                Family::RandomBand,
                Recipe::Exact(Box::new(move |g| band(g, lo, hi, 1.0, s, true))),
            ));
        }
    }
    let white_top = if dim == 3 { 10.0 } else { 20.0 };
    for copy in 0..3 {
        let s = next_seed();
        out.push((
            format!("white-{copy}"),
            Family::WhiteBand,
            Recipe::Exact(Box::new(move |g| band(g, 1.0, white_top, 0.0, s, false))),
        ));
    }
    for (i, div) in [32.0, 16.0, 8.0, 4.0].into_iter().enumerate() {
        let eps = l / div;
        out.push((
            format!("trunc-log-{i}"),
            Family::TruncatedLog,
            Recipe::Sampled(Box::new(move |x| -distance(x, &center, dim, l).max(eps).ln())),
        ));
    }
    for (i, eps) in [0.01, 0.1].into_iter().enumerate() {
        out.push((
            format!("log-sine-{i}"),
            Family::TruncatedLog,
            Recipe::Sampled(Box::new(move |x| (eps + (0.5 * kx * x[0]).sin().abs()).ln())),
        ));
    }
    let dipole = [0.25 * l, 0.5 * l, 0.5 * l];
    out.push((
        "log-dipole".into(),
        Family::TruncatedLog,
        Recipe::Sampled(Box::new(move |x| {
            let eps = l / 32.0;
            distance(x, &dipole, dim, l).max(eps).ln() - distance(x, &center, dim, l).max(eps).ln()
        })),
    ));
    for (i, div) in [16.0, 8.0, 4.0].into_iter().enumerate() {
        let r = l / div;
        out.push((
            format!("ball-{i}"),
            Family::SmoothedIndicator,
            Recipe::Sampled(Box::new(move |x| if distance(x, &center, dim, l) < r { 1.0 } else { 0.0 })),
        ));
    }
    out.push((
        "cube".into(),
        Family::SmoothedIndicator,
        Recipe::Sampled(Box::new(move |x| {
            let inside = (0..dim).all(|a| x[a] >= 0.25 * l && x[a] < 0.75 * l);
            if inside {
                1.0
            } else {
                0.0
            }
        })),
    ));
    out.push((
        "checkerboard".into(),
        Family::SmoothedIndicator,
        Recipe::Sampled(Box::new(move |x| {
            let s: f64 = (0..dim).map(|a| (kx * x[a]).sin()).product();
            s.signum()
        })),
    ));
    out.push((
        "half-space".into(),
        Family::SmoothedIndicator,
        Recipe::Sampled(Box::new(move |x| if x[last] < 0.5 * l { 1.0 } else { -1.0 })),
    ));
    for (i, sigma) in [0.2, 0.5, 1.0].into_iter().enumerate() {
        out.push((
            format!("gaussian-{i}"),
            Family::Smooth,
            Recipe::Sampled(Box::new(move |x| (-(distance(x, &center, dim, l) / sigma).powi(2)).exp())),
        ));
    }
    out.push((
        "sawtooth".into(),
        Family::Smooth,
        Recipe::Sampled(Box::new(move |x| periodic_offset(x[0], 0.5 * l, l))),
    ));
    out.push((
        "tent".into(),
        Family::Smooth,
        Recipe::Sampled(Box::new(move |x| periodic_offset(x[0], 0.5 * l, l).abs())),
    ));
    out.push((
        "cone".into(),
        Family::Smooth,
        Recipe::Sampled(Box::new(move |x| (1.0 - distance(x, &center, dim, l)).max(0.0))),
    ));
    out.push((
        "mixed".into(),
        Family::Smooth,
        Recipe::Sampled(Box::new(move |x| {
            let r = distance(x, &center, dim, l);
            (3.0 * kx * x[0]).cos() * (-r * r).exp() - (l / 16.0 + r).ln()
        })),
    ));
    out
}

impl TestCorpus {
    /// Builds the corpus on `grid`; deterministic in `seed`.
    pub fn build(grid: Grid, seed: u64) -> Result<Self> {
        let dim = grid.dim();
        let l = grid.length();
        let reference_n = match dim {
            2 => REFERENCE_N_2D,
            _ => REFERENCE_N_3D,
        }
        .max(2 * grid.n());
        let reference = Grid::new(dim, reference_n, l)?;
        let mut all = recipes(dim, l, seed);
        // single modes the grid cannot hold with margin are dropped
        let top = (grid.n() / 4) as i64;
        all.retain(|(name, _, _)| match name.strip_prefix("mode-") {
            Some(rest) => rest.parse::<i64>().map_or(true, |m| m <= top),
            None => true,
        });
        let members = all
            .into_par_iter()
            .map(|(name, family, recipe)| {
                let field = match recipe {
                    Recipe::Exact(build) => build(grid),
                    Recipe::Sampled(f) => {
                        let fine = SpectralField::sample(reference, 1, |x, _| f(x));
                        heat_apply(&fine.resampled(grid)?, REGULARISATION_TIME)?
                    }
                };
                let scale = field.to_real_values()[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(OscError::InvalidParameter(format!("corpus member {name} vanishes")));
                }
                let field = field.scale(1.0 / scale);
                let norms = NormReport::compute(&field, 0.0, &CORPUS_P)?;
                Ok(CorpusMember { name, family, field, norms })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TestCorpus { grid, seed, members })
    }

    /// Same members on the grid with twice the resolution.
    pub fn refined(&self) -> Result<Self> {
        Self::build(self.grid.refined(), self.seed)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, name: &str) -> Option<&CorpusMember> {
        self.members.iter().find(|m| m.name == name)
    }

    /// Band-limited members, used as forcing profiles.
    pub fn band_limited(&self) -> Vec<&CorpusMember> {
        self.members
            .iter()
            .filter(|m| matches!(m.family, Family::RandomBand | Family::SingleMode))
            .collect()
    }
}
