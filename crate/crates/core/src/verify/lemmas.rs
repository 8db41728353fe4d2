//! Ratio reports for the heat-semigroup, Besov, embedding and forced-heat
//! estimates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{CorpusMember, TestCorpus};
use super::report::BoundReport;
use crate::error::{OscError, Result};
use crate::semigroup::{frac_heat_apply, heat_apply};
use crate::spaces::besov::{sequence_norm, BesovIndex};
use crate::spaces::bmo::bmo_of_values;
use crate::spaces::littlewood_paley::lp_decompose;
use crate::spaces::lp::{lp_of_values, magnitudes};
use crate::spectral::SpectralField;
use crate::weights::log_weight;

/// Times at which the semigroup bounds are sampled.
pub const T_LIST: [f64; 9] = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, 10.0];
pub const FRAC_POWERS: [f64; 3] = [0.25, 0.5, 1.0];
pub const DUHAMEL_ORDERS: [usize; 3] = [1, 2, 3];

/// `sup_x |∇^m f(x)|` with the Frobenius norm over all ordered index
/// tuples and components.
pub fn derivative_sup(f: &SpectralField, order: usize) -> f64 {
    let g = *f.grid();
    let d = g.dim();
    let count = d.pow(order as u32);
    let mut acc = vec![0.0; g.len()];
    for tuple in 0..count {
        let axes: Vec<usize> = (0..order).map(|i| (tuple / d.pow(i as u32)) % d).collect();
        let df = f.apply_symbol(|i| {
            let k = g.deriv_wavevector(i);
            axes.iter().fold(Complex64::new(1.0, 0.0), |z, &a| z * Complex64::new(0.0, k[a]))
        });
        for comp in df.to_real_values() {
            acc.iter_mut().zip(&comp).for_each(|(s, v)| *s += v * v);
        }
    }
    acc.into_iter().fold(0.0, f64::max).sqrt()
}

fn member_scale(m: &CorpusMember) -> f64 {
    m.norms.linf.max(1e-300)
}

/// Semigroup bounds in BMO and bmo:
/// `‖u‖ + t^{1/2}‖∇u‖_∞ + t‖∇²u‖_∞ + t‖∂_t u‖_∞` over `‖u₀‖`.
/// Returns the BMO report followed by the bmo report.
pub fn verify_semigroup_bmo(corpus: &TestCorpus, t_list: &[f64]) -> Result<[BoundReport; 2]> {
    let rows = corpus
        .members
        .par_iter()
        .map(|m| {
            let g = *m.field.grid();
            t_list
                .iter()
                .map(|&t| {
                    let u = heat_apply(&m.field, t)?;
                    let vals = u.to_real_values();
                    let grad = t.sqrt() * derivative_sup(&u, 1);
                    let hess = t * derivative_sup(&u, 2);
                    let lap = u.apply_symbol(|i| Complex64::new(-g.k_squared(i), 0.0));
                    let dt = t * lp_of_values(&g, &magnitudes(&lap.to_real_values()), f64::INFINITY)?;
                    let derivs = grad + hess + dt;
                    Ok((t, bmo_of_values(&g, &vals, false) + derivs, bmo_of_values(&g, &vals, true) + derivs))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut global = BoundReport::new("semigroup-bmo");
    let mut local = BoundReport::new("semigroup-local-bmo");
    for (m, rs) in corpus.members.iter().zip(rows) {
        for (t, lg, ll) in rs {
            global.push(&m.name, t, "", lg, m.norms.bmo_global, member_scale(m));
            local.push(&m.name, t, "", ll, m.norms.bmo, member_scale(m));
        }
    }
    Ok([global, local])
}

pub fn frac_heat_id(alpha: f64) -> String {
    format!("frac-heat-{alpha}")
}

/// `t^α‖(−Δ)^α e^{tΔ}f‖_∞ / ‖f‖_{BMO}`, one report per power.
pub fn verify_frac_heat(corpus: &TestCorpus, alphas: &[f64], t_list: &[f64]) -> Result<Vec<BoundReport>> {
    alphas
        .iter()
        .map(|&a| {
            let rows = corpus
                .members
                .par_iter()
                .map(|m| {
                    t_list
                        .iter()
                        .map(|&t| {
                            let v = frac_heat_apply(&m.field, t, a)?;
                            Ok((t, t.powf(a) * v.magnitude_values().into_iter().fold(0.0, f64::max)))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let mut r = BoundReport::new(frac_heat_id(a));
            for (m, rs) in corpus.members.iter().zip(rows) {
                for (t, lhs) in rs {
                    r.push(&m.name, t, format!("alpha={a}"), lhs, m.norms.bmo_global, member_scale(m));
                }
            }
            Ok(r)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BesovFamily {
    /// `t^{(s₁−s₀)/2}‖e^{tΔ}f‖_{Ḃ^{s₁}_{p,q}} ≲ ‖f‖_{Ḃ^{s₀}_{p,q}}`.
    Hom,
    /// `‖e^{tΔ}f‖_{B^{s₁}_{p,q}} ≲ (1 + t^{−(s₁−s₀)/2})‖f‖_{B^{s₀}_{p,q}}`.
    NonHom,
    /// `‖e^{tΔ}f‖_{B^{s₁}_{p,1}} ≲ (1 + t^{−(s₁−s₀)/2})ln(e+1/t)‖f‖_{B^{s₀}_{p,∞}}`.
    NonHomLog,
    /// `t^{(s₁−s₀)/2}‖e^{tΔ}f‖_{Ḃ^{s₁}_{p,1}} ≲ ‖f‖_{Ḃ^{s₀}_{p,∞}}`, `s₀ < s₁`.
    HomLog,
}

impl BesovFamily {
    pub const ALL: [BesovFamily; 4] = [BesovFamily::Hom, BesovFamily::NonHom, BesovFamily::NonHomLog, BesovFamily::HomLog];

    pub fn id(&self) -> &'static str {
        match self {
            BesovFamily::Hom => "besov-hom",
            BesovFamily::NonHom => "besov-nonhom",
            BesovFamily::NonHomLog => "besov-nonhom-log",
            BesovFamily::HomLog => "besov-hom-log",
        }
    }

    fn homogeneous(&self) -> bool {
        matches!(self, BesovFamily::Hom | BesovFamily::HomLog)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovCase {
    pub family: BesovFamily,
    pub s0: f64,
    pub s1: f64,
    pub p: f64,
    /// Summation exponent of both sides; ignored by the log families.
    pub q: f64,
}

impl BesovCase {
    pub fn validate(&self) -> Result<()> {
        BesovIndex::new(self.s0, self.p, self.q)?;
        BesovIndex::new(self.s1, self.p, self.q)?;
        if self.s0 > self.s1 {
            return Err(OscError::InvalidParameter(format!("need s0 ≤ s1, got {} > {}", self.s0, self.s1)));
        }
        if self.family == BesovFamily::HomLog && self.s0 == self.s1 {
            return Err(OscError::InvalidParameter("the homogeneous log estimate needs s0 < s1".into()));
        }
        Ok(())
    }

    fn exponents(&self) -> (f64, f64) {
        match self.family {
            BesovFamily::Hom | BesovFamily::NonHom => (self.q, self.q),
            BesovFamily::NonHomLog | BesovFamily::HomLog => (1.0, f64::INFINITY),
        }
    }

    fn label(&self) -> String {
        format!("s0={} s1={} p={} q={}", self.s0, self.s1, self.p, self.q)
    }

    /// Right-side factor multiplying `‖f‖_{B^{s₀}}`.
    fn weight(&self, t: f64) -> f64 {
        let gap = 0.5 * (self.s1 - self.s0);
        match self.family {
            BesovFamily::Hom | BesovFamily::HomLog => t.powf(-gap),
            BesovFamily::NonHom => 1.0 + t.powf(-gap),
            BesovFamily::NonHomLog => (1.0 + t.powf(-gap)) * log_weight(t),
        }
    }
}

pub fn default_besov_cases() -> Vec<BesovCase> {
    let inf = f64::INFINITY;
    let mut out = Vec::new();
    let plain = [
        (0.0, 0.0, inf, inf),
        (0.0, 0.0, 2.0, 2.0),
        (0.0, 1.0, inf, 1.0),
        (0.0, 1.0, inf, inf),
        (-1.0, 1.0, 2.0, 2.0),
        (0.0, 2.0, 1.0, 2.0),
        (-1.0, 0.0, inf, 1.0),
        (0.5, 1.5, 1.0, inf),
    ];
    for family in [BesovFamily::Hom, BesovFamily::NonHom] {
        for &(s0, s1, p, q) in &plain {
            out.push(BesovCase { family, s0, s1, p, q });
        }
    }
    for p in [1.0, 2.0, inf] {
        for (s0, s1) in [(0.0, 0.0), (0.0, 1.0), (-1.0, 1.0)] {
            out.push(BesovCase { family: BesovFamily::NonHomLog, s0, s1, p, q: 1.0 });
        }
        for (s0, s1) in [(0.0, 1.0), (-1.0, 1.0), (0.0, 2.0)] {
            out.push(BesovCase { family: BesovFamily::HomLog, s0, s1, p, q: 1.0 });
        }
    }
    out
}

/// `(j, [‖φ_j f‖₁, ‖φ_j f‖₂, ‖φ_j f‖_∞])` for every block.
fn block_table(f: &SpectralField, homogeneous: bool) -> Result<Vec<(i32, [f64; 3])>> {
    let g = *f.grid();
    lp_decompose(f, homogeneous)
        .blocks
        .iter()
        .map(|(j, b)| {
            let mags = magnitudes(&b.to_real_values());
            Ok((
                *j,
                [
                    lp_of_values(&g, &mags, 1.0)?,
                    lp_of_values(&g, &mags, 2.0)?,
                    lp_of_values(&g, &mags, f64::INFINITY)?,
                ],
            ))
        })
        .collect()
}

fn besov_of_table(table: &[(i32, [f64; 3])], s: f64, p: f64, q: f64) -> f64 {
    let slot = if p == 1.0 {
        0
    } else if p == 2.0 {
        1
    } else {
        2
    };
    let terms: Vec<f64> = table.iter().map(|(j, n)| 2f64.powf(*j as f64 * s) * n[slot]).collect();
    sequence_norm(&terms, q)
}

/// The four Besov smoothing estimates, one report per family (in
/// [`BesovFamily::ALL`] order). Only `p ∈ {1, 2, ∞}` is supported.
pub fn verify_besov_holder(corpus: &TestCorpus, cases: &[BesovCase], t_list: &[f64]) -> Result<Vec<BoundReport>> {
    for c in cases {
        c.validate()?;
        if ![1.0, 2.0, f64::INFINITY].contains(&c.p) {
            return Err(OscError::InvalidParameter(format!("Besov check supports p ∈ {{1, 2, ∞}}, got {}", c.p)));
        }
    }
    type Row = (usize, f64, usize, f64, f64);
    let rows: Vec<Vec<Row>> = corpus
        .members
        .par_iter()
        .enumerate()
        .map(|(mi, m)| {
            let data = [block_table(&m.field, false)?, block_table(&m.field, true)?];
            let mut out = Vec::new();
            for &t in t_list {
                let u = heat_apply(&m.field, t)?;
                let smoothed = [block_table(&u, false)?, block_table(&u, true)?];
                for (ci, c) in cases.iter().enumerate() {
                    let h = c.family.homogeneous() as usize;
                    let (q_lhs, q_rhs) = c.exponents();
                    let lhs = besov_of_table(&smoothed[h], c.s1, c.p, q_lhs);
                    let rhs = c.weight(t) * besov_of_table(&data[h], c.s0, c.p, q_rhs);
                    out.push((mi, t, ci, lhs, rhs));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut reports: Vec<BoundReport> = BesovFamily::ALL.iter().map(|f| BoundReport::new(f.id())).collect();
    for (mi, t, ci, lhs, rhs) in rows.into_iter().flatten() {
        let c = &cases[ci];
        let m = &corpus.members[mi];
        let slot = BesovFamily::ALL.iter().position(|f| *f == c.family).expect("family listed");
        reports[slot].push(&m.name, t, c.label(), lhs, rhs, member_scale(m));
    }
    Ok(reports)
}

pub const EMBEDDING_IDS: [&str; 4] = ["embed-besov-bmo", "embed-bmo-linf", "embed-hom-besov-bmo", "embed-bmo-global-local"];

/// `‖f‖_{B⁰_{∞,∞}}/‖f‖_{bmo}`, `‖f‖_{bmo}/‖f‖_∞`, `‖f‖_{Ḃ⁰_{∞,∞}}/‖f‖_{BMO}`
/// and `‖f‖_{BMO}/‖f‖_{bmo}`.
pub fn verify_embeddings(corpus: &TestCorpus) -> Vec<BoundReport> {
    let mut reports: Vec<BoundReport> = EMBEDDING_IDS.iter().map(|id| BoundReport::new(*id)).collect();
    for m in &corpus.members {
        let n = &m.norms;
        let s = member_scale(m);
        reports[0].push(&m.name, 0.0, "", n.besov_0_inf_inf, n.bmo, s);
        reports[1].push(&m.name, 0.0, "", n.bmo, n.linf, s);
        reports[2].push(&m.name, 0.0, "", n.besov_hom_0_inf_inf, n.bmo_global, s);
        reports[3].push(&m.name, 0.0, "", n.bmo_global, n.bmo, s);
    }
    reports
}

/// Solution of `∂_t u − Δu = ∇·F`, `u(0) = u₀`, with time-independent `F`:
/// `û = e^{−t|k|²}û₀ + (1 − e^{−t|k|²})/|k|² · ik·F̂`.
pub fn forced_heat(u0: &SpectralField, forcing: &SpectralField, t: f64) -> Result<SpectralField> {
    let g = *u0.grid();
    if forcing.components() != g.dim() || u0.components() != 1 {
        return Err(OscError::ShapeMismatch("forced heat needs a scalar u₀ and a d-vector F".into()));
    }
    u0.check_grid(forcing)?;
    let mut out = heat_apply(u0, t)?;
    for a in 0..g.dim() {
        let part = forcing.component(a).apply_symbol(|i| {
            let k2 = g.k_squared(i);
            if k2 == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let k = g.deriv_wavevector(i);
            Complex64::new(0.0, k[a] * -(-t * k2).exp_m1() / k2)
        });
        out = out.add(&part)?;
    }
    Ok(out)
}

pub fn duhamel_id(order: usize) -> String {
    format!("duhamel-analytic-k{order}")
}

/// `‖∇^k u(t)‖_∞ / (t^{−k/2}‖u₀‖_{BMO} + t‖∇^{k+1}F‖_∞)` for the forced heat
/// problem, one report per order. Each member serves as `u₀` with a
/// band-limited forcing built from the corpus, and the unforced and
/// zero-data cases are included.
pub fn verify_duhamel_analytic(corpus: &TestCorpus, orders: &[usize], t_list: &[f64]) -> Result<Vec<BoundReport>> {
    let g = corpus.grid;
    let d = g.dim();
    let bands = corpus.band_limited();
    if bands.len() < d {
        return Err(OscError::InvalidParameter("corpus has too few band-limited members".into()));
    }
    let zero_scalar = SpectralField::zeros(g, 1, true);
    let zero_vector = SpectralField::zeros(g, d, true);
    // (label, u0, BMO of u0, forcing)
    let mut problems: Vec<(String, SpectralField, f64, SpectralField)> = Vec::new();
    for (i, m) in corpus.members.iter().enumerate() {
        let parts: Vec<SpectralField> = (0..d).map(|a| bands[(i + a) % bands.len()].field.clone()).collect();
        let forcing = SpectralField::stack(&parts)?;
        problems.push((m.name.clone(), m.field.clone(), m.norms.bmo_global, forcing));
        problems.push((format!("{}|unforced", m.name), m.field.clone(), m.norms.bmo_global, zero_vector.clone()));
    }
    for (i, b) in bands.iter().enumerate() {
        let parts: Vec<SpectralField> = (0..d).map(|a| bands[(i + a) % bands.len()].field.clone()).collect();
        problems.push((format!("{}|zero-data", b.name), zero_scalar.clone(), 0.0, SpectralField::stack(&parts)?));
    }
    let rows = problems
        .par_iter()
        .map(|(label, u0, bmo, forcing)| {
            let forcing_sups: Vec<f64> = orders.iter().map(|&k| derivative_sup(forcing, k + 1)).collect();
            let mut out = Vec::new();
            for &t in t_list {
                let u = forced_heat(u0, forcing, t)?;
                for (oi, &k) in orders.iter().enumerate() {
                    let lhs = derivative_sup(&u, k);
                    let rhs = t.powf(-0.5 * k as f64) * bmo + t * forcing_sups[oi];
                    out.push((label.clone(), t, oi, lhs, rhs));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut reports: Vec<BoundReport> = orders.iter().map(|&k| BoundReport::new(duhamel_id(k))).collect();
    for (label, t, oi, lhs, rhs) in rows.into_iter().flatten() {
        reports[oi].push(&label, t, format!("k={}", orders[oi]), lhs, rhs, 1.0);
    }
    Ok(reports)
}
