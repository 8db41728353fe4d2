//! Numerical stress tests of the inequality lemmas, with frozen constants.
//!
//! Each bound family becomes a [`BoundReport`] of ratios `LHS/RHS` over a
//! seeded corpus. A calibration run records the maxima; later runs fail
//! when a maximum exceeds the frozen value by more than the regression
//! factor, or when the maximum moves by more than 10% from `N` to `2N`.

pub mod corpus;
pub mod cz;
pub mod lemmas;
pub mod report;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use corpus::{CorpusMember, Family, TestCorpus};
pub use cz::{verify_cz_orlicz, CzOperator};
pub use lemmas::{
    default_besov_cases, derivative_sup, forced_heat, verify_besov_holder, verify_duhamel_analytic, verify_embeddings,
    verify_frac_heat, verify_semigroup_bmo, BesovCase, BesovFamily,
};
pub use report::{BoundReport, Check, RatioRow};

use crate::calibration::Calibration;
use crate::error::{OscError, Result};
use crate::iteration::config::{DataPiece, ForcingSpec, Mode, TrigTerm};
use crate::iteration::{Iteration, IterationConfig};
use crate::semigroup::{biot_savart, curl};
use crate::spaces::lp::{lp_of_values, magnitudes};
use crate::spectral::{Grid, SpectralField};
use crate::weights::all_weights;

pub const DEFAULT_GRID_N: usize = 64;
pub const SPOT_3D_N: usize = 32;
pub const DEFAULT_SEED: u64 = 20240601;
/// Grid of the runs that calibrate the iteration constant.
pub const ITERATION_CALIBRATION_N: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lemma {
    SemigroupBmo,
    FracHeat,
    BesovHolder,
    Embeddings,
    DuhamelAnalytic,
    CzOrlicz,
    BiotSavart,
    IterationConstant,
}

impl Lemma {
    pub const ALL: [Lemma; 8] = [
        Lemma::SemigroupBmo,
        Lemma::FracHeat,
        Lemma::BesovHolder,
        Lemma::Embeddings,
        Lemma::DuhamelAnalytic,
        Lemma::CzOrlicz,
        Lemma::BiotSavart,
        Lemma::IterationConstant,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Lemma::SemigroupBmo => "semigroup-bmo",
            Lemma::FracHeat => "frac-heat",
            Lemma::BesovHolder => "besov-holder",
            Lemma::Embeddings => "embeddings",
            Lemma::DuhamelAnalytic => "duhamel-analytic",
            Lemma::CzOrlicz => "cz-orlicz",
            Lemma::BiotSavart => "biot-savart",
            Lemma::IterationConstant => "iteration-constant",
        }
    }

    /// Whether the N versus 2N comparison applies.
    fn resolution_checked(&self) -> bool {
        !matches!(self, Lemma::BiotSavart | Lemma::IterationConstant)
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Lemma {
    type Err = OscError;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Lemma::ALL.iter().map(|l| l.name()).collect();
                OscError::Config(format!("unknown lemma '{s}' (known: {})", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub grid_n: usize,
    pub seed: u64,
    pub resolution_check: bool,
    pub spot_3d_n: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            grid_n: DEFAULT_GRID_N,
            seed: DEFAULT_SEED,
            resolution_check: true,
            spot_3d_n: SPOT_3D_N,
        }
    }
}

/// Reports of one lemma group on one corpus (no frozen constants).
pub fn lemma_reports(lemma: Lemma, corpus: &TestCorpus) -> Result<Vec<BoundReport>> {
    let t = &lemmas::T_LIST;
    Ok(match lemma {
        Lemma::SemigroupBmo => verify_semigroup_bmo(corpus, t)?.to_vec(),
        Lemma::FracHeat => verify_frac_heat(corpus, &lemmas::FRAC_POWERS, t)?,
        Lemma::BesovHolder => verify_besov_holder(corpus, &default_besov_cases(), t)?,
        Lemma::Embeddings => verify_embeddings(corpus),
        Lemma::DuhamelAnalytic => verify_duhamel_analytic(corpus, &lemmas::DUHAMEL_ORDERS, t)?,
        Lemma::CzOrlicz => verify_cz_orlicz(corpus, &cz::CZ_T_LIST)?,
        Lemma::BiotSavart => vec![verify_biot_savart(corpus)?],
        Lemma::IterationConstant => vec![calibrate_iteration_constant(corpus.seed)?.1],
    })
}

/// `‖BS(w)‖_∞ / (‖w‖_∞ + ‖w‖_{L^p})` for divergence-free `w = curl ψ`,
/// `ψ` assembled from three consecutive members of a 3D corpus.
pub fn verify_biot_savart(corpus: &TestCorpus) -> Result<BoundReport> {
    if corpus.grid.dim() != 3 {
        return Err(OscError::InvalidParameter("the Biot–Savart check needs a 3D corpus".into()));
    }
    let n = corpus.len();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let parts: Vec<SpectralField> = (0..3).map(|a| corpus.members[(i + a) % n].field.clone()).collect();
            let w = curl(&SpectralField::stack(&parts)?)?;
            let u = biot_savart(&w)?;
            let g = corpus.grid;
            let wm = magnitudes(&w.to_real_values());
            let um = magnitudes(&u.to_real_values());
            let linf = lp_of_values(&g, &wm, f64::INFINITY)?;
            let out = [1.0, 2.0]
                .iter()
                .map(|&p| Ok((p, lp_of_values(&g, &um, f64::INFINITY)?, linf + lp_of_values(&g, &wm, p)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((corpus.members[i].name.clone(), linf, out))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = BoundReport::new("biot-savart-linf");
    for (name, scale, out) in rows {
        for (p, lhs, rhs) in out {
            r.push(&format!("curl[{name}..]"), 0.0, format!("p={p}"), lhs, rhs, scale);
        }
    }
    Ok(r)
}

fn calibration_configs() -> Result<Vec<(&'static str, IterationConfig)>> {
    let grid = Grid::new(2, ITERATION_CALIBRATION_N, std::f64::consts::TAU)?;
    let base = |initial: Vec<DataPiece>, horizon: f64| IterationConfig {
        grid,
        horizon,
        time_grid: Default::default(),
        alpha: Vec::new(),
        initial,
        forcing: ForcingSpec::default(),
        max_iterations: 40,
        tolerance: 1e-12,
        mode: Mode::Velocity,
        p: 2.0,
        constant: Some(1.0),
        seed: 0,
        probe_times: Vec::new(),
    };
    let tg = |a: f64| DataPiece::TaylorGreen { amplitude: a };
    let band = |a: f64, hi: f64, seed: u64| DataPiece::WhiteBand { amplitude: a, k_min: 1.0, k_max: hi, seed };
    let mut shifted = base(vec![tg(1e-3), band(2.5e-4, 8.0, 1)], 0.2);
    shifted.alpha = vec![0.016, 0.012];
    let mut forced = base(vec![tg(1e-2)], 0.2);
    forced.forcing = ForcingSpec {
        terms: vec![TrigTerm { freq: vec![1, 0], cos: vec![], sin: vec![0.0, 1e-2] }],
        ..Default::default()
    };
    Ok(vec![
        ("taylor-green-small", base(vec![tg(1e-3)], 0.2)),
        ("taylor-green-moderate", base(vec![tg(0.05)], 0.2)),
        ("shifted-perturbed", shifted),
        ("forced", forced),
        ("white-band", base(vec![band(0.02, 6.0, 7)], 0.1)),
    ])
}

/// Runs small solver problems and measures
/// `M_{n+1} / (‖u₀‖ + TΨ₁(T)Γ + T^{1/2}Ψ₂(T)M_n²)` (`M_{−1} = 0`). The
/// iteration constant is the safety factor times the largest ratio.
pub fn calibrate_iteration_constant(seed: u64) -> Result<(f64, BoundReport)> {
    let cal = Calibration::embedded();
    let mut report = BoundReport::new("iteration-constant");
    for (label, mut config) in calibration_configs()? {
        config.seed = seed;
        let it = Iteration::new(&config, &cal)?;
        let (_, conv) = it.run()?;
        let s = it.setup();
        let w = all_weights(config.horizon)?;
        let (t, big1, big2) = (config.horizon, w[7], w[8]);
        let linear = s.data_norm + t * big1 * s.forcing_level;
        let mut prev = 0.0;
        for m in &conv.monitors {
            let rhs = linear + t.sqrt() * big2 * prev * prev;
            report.push(label, t, format!("n={}", m.n), m.max, rhs, linear.max(f64::MIN_POSITIVE));
            prev = m.max;
        }
    }
    Ok((cal.safety_factor * report.max_ratio, report))
}

/// Builds corpora lazily and runs lemma groups against them.
pub struct Verifier {
    pub options: VerifyOptions,
    corpus: Option<TestCorpus>,
    refined: Option<TestCorpus>,
    corpus_3d: Option<TestCorpus>,
}

impl Verifier {
    pub fn new(options: VerifyOptions) -> Self {
        Verifier { options, corpus: None, refined: None, corpus_3d: None }
    }

    pub fn corpus(&mut self) -> Result<&TestCorpus> {
        if self.corpus.is_none() {
            let g = Grid::new(2, self.options.grid_n, std::f64::consts::TAU)?;
            self.corpus = Some(TestCorpus::build(g, self.options.seed)?);
        }
        Ok(self.corpus.as_ref().expect("just built"))
    }

    fn refined(&mut self) -> Result<&TestCorpus> {
        if self.refined.is_none() {
            let r = self.corpus()?.refined()?;
            self.refined = Some(r);
        }
        Ok(self.refined.as_ref().expect("just built"))
    }

    fn corpus_3d(&mut self) -> Result<&TestCorpus> {
        if self.corpus_3d.is_none() {
            let g = Grid::new(3, self.options.spot_3d_n, std::f64::consts::TAU)?;
            self.corpus_3d = Some(TestCorpus::build(g, self.options.seed)?);
        }
        Ok(self.corpus_3d.as_ref().expect("just built"))
    }

    /// Reports of one lemma group: the 2D corpus (with the `2N` drift
    /// check) plus the 3D spot checks where they apply.
    pub fn run(&mut self, lemma: Lemma) -> Result<Vec<BoundReport>> {
        let mut reports = match lemma {
            Lemma::BiotSavart => lemma_reports(lemma, self.corpus_3d()?)?,
            _ => lemma_reports(lemma, self.corpus()?)?,
        };
        if self.options.resolution_check && lemma.resolution_checked() {
            let fine = lemma_reports(lemma, self.refined()?)?;
            for (r, f) in reports.iter_mut().zip(fine) {
                debug_assert_eq!(r.id, f.id);
                r.add_resolution_check(f.max_ratio);
            }
        }
        if matches!(lemma, Lemma::SemigroupBmo | Lemma::CzOrlicz) {
            let corpus = self.corpus_3d()?;
            let spot = match lemma {
                Lemma::SemigroupBmo => {
                    let [mut a, mut b] = verify_semigroup_bmo(corpus, &lemmas::T_LIST)?;
                    a.id.push_str("-3d");
                    b.id.push_str("-3d");
                    vec![a, b]
                }
                _ => verify_cz_orlicz(corpus, &cz::CZ_T_LIST)?,
            };
            reports.extend(spot);
        }
        Ok(reports)
    }

    pub fn run_all(&mut self, lemmas: &[Lemma]) -> Result<Vec<BoundReport>> {
        let mut out = Vec::new();
        for &l in lemmas {
            log::info!("verifying {l}");
            out.extend(self.run(l)?);
        }
        Ok(out)
    }
}

/// Attaches frozen constants; every report must have one.
pub fn apply_frozen(reports: &mut [BoundReport], cal: &Calibration) -> Result<()> {
    for r in reports.iter_mut() {
        r.frozen = Some(cal.bound(&r.id)?);
    }
    Ok(())
}

/// New calibration: frozen maxima from `reports` replace those in `base`;
/// the iteration and Biot–Savart constants are the safety factor times
/// their maxima.
pub fn freeze(reports: &mut [BoundReport], base: &Calibration, options: &VerifyOptions) -> Result<Calibration> {
    let mut cal = base.clone();
    cal.corpus_seed = options.seed;
    cal.grid_n = options.grid_n;
    for r in reports.iter_mut() {
        if !r.all_finite() {
            return Err(OscError::Calibration(format!("report {} has non-finite ratios", r.id)));
        }
        cal.bounds.insert(r.id.clone(), r.max_ratio);
        r.frozen = Some(r.max_ratio);
        match r.id.as_str() {
            "iteration-constant" => cal.iteration_constant = cal.safety_factor * r.max_ratio,
            "biot-savart-linf" => cal.biot_savart_constant = cal.safety_factor * r.max_ratio,
            _ => {}
        }
    }
    cal.validate()?;
    Ok(cal)
}

/// Writes `<dir>/<id>.csv` for every report.
pub fn write_reports(dir: &Path, reports: &[BoundReport]) -> Result<()> {
    for r in reports {
        r.write_csv(dir)?;
    }
    Ok(())
}
