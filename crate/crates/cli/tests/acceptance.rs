//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use osc_cli::error::EXIT_OK;
use osc_cli::run::{cmd_run, resolve_run_config, RunOutcome};
use osc_core::calibration::Calibration;
use osc_core::iteration::{Iteration, IterationState, Mode};
use osc_core::semigroup::{curl, divergence_defect, heat_apply, leray_project};
use osc_core::spaces::orlicz::{orlicz_integral, orlicz_of_values};
use osc_core::spaces::{
    besov_norm, bmo_norm, legendre_fenchel, linf_norm, lp_decompose, lp_norm, OrliczDomain,
    OrliczSpec,
};
use osc_core::spectral::{evaluate_complex_shift, Grid, SpectralField};
use osc_core::verify::{apply_frozen, Lemma, TestCorpus, Verifier, VerifyOptions, DEFAULT_SEED};
use osc_core::weights::horizons::{horizon_tomega, HorizonInput};

const SPECTRAL_TOL: f64 = 1e-12;
const LP_RECONSTRUCTION_TOL: f64 = 1e-10;
const NORM_PROPERTY_TOL: f64 = 1e-12;
const TG_LIMIT_TOL: f64 = 1e-5;
const TG_RESIDUAL_TOL: f64 = 1e-5;
const TG_PROBES: usize = 8;
const SECTOR_TOL: f64 = 1e-12;
const RADIUS_TIMES: [f64; 3] = [0.01, 0.04, 0.16];
const RADIUS_FIT_TOL: f64 = 0.15;
const SHIFT_TOL: f64 = 1e-3;
const SHIFT_PROBES: usize = 4;
const VERIFY_BUDGET_SECONDS: f64 = 15.0 * 60.0;
const CANCELLATION_TOL: f64 = 1e-8;
const CURL_TOL: f64 = 1e-4;
const LARGE_DATA_NORMS: [f64; 4] = [1.5, 2.0, 4.0, 8.0];
const LUXEMBURG_RANGE: (f64, f64) = (0.999, 1.001);
const SELF_DUAL_TOL: f64 = 1e-6;
/// Range of `y` over which `ψ_*(y)/e^y` must stay bounded.
const CONJUGATE_Y: (f64, f64) = (2.0, 10.0);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome, String> {
    Ok(Outcome { pass, detail })
}

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn random_field(grid: Grid, components: usize, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<Vec<f64>> =
        (0..components).map(|_| (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    SpectralField::from_real_values(grid, &values).expect("shape")
}

fn run_preset(name: &str, mode: Mode, out: &Path) -> Result<RunOutcome, String> {
    let o = cmd_run(&presets().join(name), mode, out, None).map_err(|e| e.to_string())?;
    if o.exit_code != EXIT_OK {
        return Err(format!("{name} exited with {}", o.exit_code));
    }
    Ok(o)
}

fn state_of(o: &RunOutcome) -> Result<&IterationState, String> {
    o.state.as_ref().ok_or_else(|| "run produced no iterate".to_string())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn spectral() -> Result<Outcome, String> {
    let e = |x: osc_core::error::OscError| x.to_string();
    let mut worst: f64 = 0.0;
    for (d, n) in [(2, 64), (3, 16)] {
        let g = Grid::new(d, n, std::f64::consts::TAU).map_err(e)?;
        let u = random_field(g, d, 11 + d as u64);
        let vals = u.to_real_values();
        let back = SpectralField::from_real_values(g, &u.to_real_values()).map_err(e)?.to_real_values();
        let scale = linf_norm(&u);
        let trip = vals.iter().flatten().zip(back.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let mean_sq = vals.iter().flatten().map(|v| v * v).sum::<f64>() / g.len() as f64;
        let p = u.leray_pair(e)?;
        let again = leray_project(&p).map_err(e)?;
        let idem = again.sub(&p).map_err(e)?.max_coeff() / p.max_coeff();
        let div = divergence_defect(&p).map_err(e)?;
        let (s, t) = (0.013, 0.029);
        let two = heat_apply(&heat_apply(&u, s).map_err(e)?, t).map_err(e)?;
        let one = heat_apply(&u, s + t).map_err(e)?;
        let semi = two.sub(&one).map_err(e)?.max_coeff() / one.max_coeff();
        for v in [trip / scale, rel(u.energy(), mean_sq), idem, div, semi] {
            worst = worst.max(v);
        }
    }
    outcome(worst <= SPECTRAL_TOL, format!("worst relative defect {worst:.3e} (tol {SPECTRAL_TOL:.0e})"))
}

trait LerayPair {
    fn leray_pair(&self, e: impl Fn(osc_core::error::OscError) -> String) -> Result<SpectralField, String>;
}

impl LerayPair for SpectralField {
    fn leray_pair(&self, e: impl Fn(osc_core::error::OscError) -> String) -> Result<SpectralField, String> {
        leray_project(self).map_err(e)
    }
}

fn norm_battery(f: &SpectralField) -> osc_core::error::Result<Vec<f64>> {
    Ok(vec![
        linf_norm(f),
        lp_norm(f, 1.0)?,
        lp_norm(f, 2.0)?,
        bmo_norm(f, false)?,
        bmo_norm(f, true)?,
        besov_norm(f, 0.0, f64::INFINITY, f64::INFINITY, false)?,
        besov_norm(f, 1.0, f64::INFINITY, 1.0, true)?,
        besov_norm(f, 0.5, 2.0, 2.0, false)?,
    ])
}

fn littlewood_paley() -> Result<Outcome, String> {
    let e = |x: osc_core::error::OscError| x.to_string();
    let g = Grid::new(2, 64, std::f64::consts::TAU).map_err(e)?;
    let corpus = TestCorpus::build(g, DEFAULT_SEED).map_err(e)?;
    let mut recon: f64 = 0.0;
    let mut property: f64 = 0.0;
    let lambda = -2.5;
    for (i, m) in corpus.members.iter().enumerate() {
        let f = &m.field;
        let scale = f.max_coeff();
        let full = lp_decompose(f, false).reconstruct().map_err(e)?;
        recon = recon.max(full.sub(f).map_err(e)?.max_coeff() / scale);
        let hom = lp_decompose(f, true).reconstruct().map_err(e)?;
        let mut centred = f.clone();
        centred.coeffs_mut(0)[0] = Complex64::new(0.0, 0.0);
        recon = recon.max(hom.sub(&centred).map_err(e)?.max_coeff() / scale);

        let other = &corpus.members[(i + 1) % corpus.len()].field;
        let base = norm_battery(f).map_err(e)?;
        let scaled = norm_battery(&f.scale(lambda)).map_err(e)?;
        let g2 = norm_battery(other).map_err(e)?;
        let sum = norm_battery(&f.add(other).map_err(e)?).map_err(e)?;
        for k in 0..base.len() {
            let tol = NORM_PROPERTY_TOL * (base[k] + g2[k]).max(f64::MIN_POSITIVE);
            property = property.max(((scaled[k] - lambda.abs() * base[k]).abs() - NORM_PROPERTY_TOL * base[k]).max(0.0));
            property = property.max((sum[k] - base[k] - g2[k] - tol).max(0.0));
        }
    }
    outcome(
        recon <= LP_RECONSTRUCTION_TOL && property == 0.0,
        format!(
            "{} members, reconstruction {recon:.3e} (tol {LP_RECONSTRUCTION_TOL:.0e}), homogeneity/triangle excess {property:.3e}",
            corpus.len()
        ),
    )
}

fn taylor_green(sector_only: bool) -> Result<Outcome, String> {
    let cfg = resolve_run_config(&presets().join("taylor-green.json"), Mode::Velocity, None).map_err(|e| e.to_string())?;
    let it = Iteration::new(&cfg.solver, &Calibration::embedded()).map_err(|e| e.to_string())?;
    let mut sector: f64 = 0.0;
    let (state, report) = it
        .run_observed(&mut |s: &IterationState| sector = sector.max(s.imaginary_sup()))
        .map_err(|e| e.to_string())?;
    if sector_only {
        let sup = report.monitors.iter().map(|m| m.max).fold(0.0, f64::max);
        return outcome(
            sector <= SECTOR_TOL && report.monitor_bound_holds,
            format!(
                "sup_n ‖V‖∞ = {sector:.3e} (tol {SECTOR_TOL:.0e}); sup M_n = {sup:.6e} ≤ bound {:.6e} with C = {:.6}",
                report.setup.monitor_bound, report.setup.constant
            ),
        );
    }
    let u0 = cfg.solver.initial_velocity().map_err(|e| e.to_string())?;
    let mut gap: f64 = 0.0;
    for &t in &cfg.solver.probe_times {
        let i = state.index_of(t).ok_or("probe time missing from the snapshot grid")?;
        let exact = u0.scale((-2.0 * t).exp());
        gap = gap.max(linf_norm(&state.fields[i].re.sub(&exact).map_err(|e| e.to_string())?));
    }
    let probes = cfg.solver.probe_times.len();
    outcome(
        report.converged && probes == TG_PROBES && gap <= TG_LIMIT_TOL && report.max_residual < TG_RESIDUAL_TOL,
        format!(
            "converged {} in {} iterates; limit gap {gap:.3e} at {probes} probes (tol {TG_LIMIT_TOL:.0e}); residual {:.3e}",
            report.converged, report.iterations, report.max_residual
        ),
    )
}

fn radius_growth(out: &Path) -> Result<Outcome, String> {
    let o = run_preset("taylor-green-shifted.json", Mode::Velocity, out)?;
    let r = o.report.radius.as_ref().ok_or("no radius report")?;
    let g = r.growth.as_ref().ok_or("no radius fit")?;
    let times: Vec<f64> = r.estimates.iter().map(|e| e.t).collect();
    let times_ok = times.len() == RADIUS_TIMES.len() && times.iter().zip(RADIUS_TIMES).all(|(a, b)| rel(*a, b) < 1e-9);
    let radii: Vec<String> = r.estimates.iter().map(|e| format!("{:.4}", e.radius)).collect();
    outcome(
        times_ok && r.strictly_nondecreasing && g.lower_bound_holds && g.max_residual < RADIUS_FIT_TOL,
        format!(
            "δ̂ = [{}] at t = {:?}; c_fit = {:.6e}; fit residual {:.3} (tol {RADIUS_FIT_TOL})",
            radii.join(", "),
            RADIUS_TIMES,
            g.c_fit,
            g.max_residual
        ),
    )
}

fn shift_consistency(out: &Path) -> Result<Outcome, String> {
    let o = run_preset("taylor-green-shifted.json", Mode::Velocity, out)?;
    let shifted = state_of(&o)?;
    let mut cfg =
        resolve_run_config(&presets().join("taylor-green-shifted.json"), Mode::Velocity, None).map_err(|e| e.to_string())?;
    let alpha = cfg.solver.alpha();
    cfg.solver.alpha = vec![0.0; alpha.len()];
    let (base, _) = Iteration::new(&cfg.solver, &Calibration::embedded())
        .and_then(|it| it.run())
        .map_err(|e| e.to_string())?;
    let mut gap: f64 = 0.0;
    let probes = &cfg.solver.probe_times;
    for &t in probes {
        let (i, j) = (base.index_of(t).ok_or("probe missing")?, shifted.index_of(t).ok_or("probe missing")?);
        let y: Vec<f64> = alpha.iter().map(|a| a * t).collect();
        let ev = evaluate_complex_shift(&base.fields[i].re, &y).map_err(|e| e.to_string())?;
        let (re, im) = (shifted.fields[j].re.to_real_values(), shifted.fields[j].im.to_real_values());
        for c in 0..re.len() {
            for k in 0..re[c].len() {
                gap = gap.max((ev.values[c][k] - Complex64::new(re[c][k], im[c][k])).norm());
            }
        }
    }
    outcome(
        probes.len() == SHIFT_PROBES && gap <= SHIFT_TOL,
        format!("max |U+iV − u(x+iαt)| = {gap:.3e} over {} probes (tol {SHIFT_TOL:.0e})", probes.len()),
    )
}

fn lemma_regression() -> Result<Outcome, String> {
    let start = Instant::now();
    let cal = Calibration::embedded();
    let mut verifier = Verifier::new(VerifyOptions::default());
    let mut reports = verifier.run_all(&Lemma::ALL).map_err(|e| e.to_string())?;
    apply_frozen(&mut reports, &cal).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed(cal.regression_factor)).map(|r| r.id.clone()).collect();
    let cancellation = reports
        .iter()
        .flat_map(|r| r.checks.iter())
        .filter(|c| c.name.starts_with("cancellation"))
        .map(|c| c.value)
        .fold(0.0, f64::max);
    let drift = reports
        .iter()
        .flat_map(|r| r.checks.iter())
        .filter(|c| c.name == "resolution_drift")
        .map(|c| c.value)
        .fold(0.0, f64::max);
    outcome(
        failed.is_empty() && cancellation <= CANCELLATION_TOL && elapsed < VERIFY_BUDGET_SECONDS,
        format!(
            "{} reports within frozen × {}; worst N→2N drift {:.1}%; cancellation {cancellation:.1e}; {elapsed:.0}s{}",
            reports.len(),
            cal.regression_factor,
            100.0 * drift,
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(" ")) }
        ),
    )
}

fn vorticity(out: &Path) -> Result<Outcome, String> {
    let vel = run_preset("curl-consistency.json", Mode::Velocity, &out.join("velocity"))?;
    let vor = run_preset("curl-consistency.json", Mode::Vorticity, &out.join("vorticity"))?;
    let p1 = run_preset("vorticity-p1.json", Mode::Vorticity, &out.join("p1"))?;
    let (a, b) = (state_of(&vel)?, state_of(&vor)?);
    let mut gap: f64 = 0.0;
    for (u, w) in a.fields.iter().zip(&b.fields) {
        let c = curl(&u.re).map_err(|e| e.to_string())?;
        gap = gap.max(linf_norm(&c.sub(&w.re).map_err(|e| e.to_string())?));
    }
    let conv = vor.report.convergence.as_ref().ok_or("no vorticity report")?;
    let ratio = conv.velocity_ratio.unwrap_or(f64::NAN);
    let within = conv.velocity_ratio_within == Some(true);
    let branches = vor.report.setup.horizon.branch == "p>1" && p1.report.setup.horizon.branch == "p=1";
    let c = Calibration::embedded().iteration_constant;
    let mut ordered = true;
    for &a in &LARGE_DATA_NORMS {
        let h1 = horizon_tomega(&HorizonInput::vorticity(a, 0.0, c, 1.0)).map_err(|e| e.to_string())?;
        let h2 = horizon_tomega(&HorizonInput::vorticity(a, 0.0, c, 2.0)).map_err(|e| e.to_string())?;
        ordered &= h1.t <= h2.t;
    }
    outcome(
        gap <= CURL_TOL && within && branches && ordered,
        format!(
            "curl gap {gap:.3e} (tol {CURL_TOL:.0e}); ‖U‖∞/(‖W‖∞+‖W‖_p) = {ratio:.4} ≤ {:.4}; both branches ran; T_ω(p=1) ≤ T_ω(p=2) for data {:?}: {ordered}",
            Calibration::embedded().biot_savart_constant,
            LARGE_DATA_NORMS
        ),
    )
}

fn orlicz() -> Result<Outcome, String> {
    let g = Grid::new(2, 64, std::f64::consts::TAU).map_err(|e| e.to_string())?;
    let f = SpectralField::sample(g, 1, |x, _| 1.0 + 3.0 * x[0].sin() * x[1].cos());
    let mags = f.magnitude_values();
    let mut lux = Vec::new();
    for spec in [OrliczSpec::phi_star(), OrliczSpec::psi_star()] {
        let s = orlicz_of_values(&g, &mags, &spec, OrliczDomain::Full).map_err(|e| e.to_string())?;
        lux.push(orlicz_integral(&g, &mags, &vec![true; g.len()], &spec, s));
    }
    let lux_ok = lux.iter().all(|i| (LUXEMBURG_RANGE.0..=LUXEMBURG_RANGE.1).contains(i));
    let ys: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    let quad = legendre_fenchel(&|x: f64| 0.5 * x * x, &ys);
    let dual = ys.iter().zip(&quad.values).map(|(y, v)| (v - 0.5 * y * y).abs() / (1.0 + 0.5 * y * y)).fold(0.0, f64::max);
    let phi = OrliczSpec::phi_star();
    let yc: Vec<f64> = (0..=32).map(|i| CONJUGATE_Y.0 + (CONJUGATE_Y.1 - CONJUGATE_Y.0) * i as f64 / 32.0).collect();
    let conj = legendre_fenchel(&|x| phi.eval(x), &yc);
    let ratios: Vec<f64> = yc.iter().zip(&conj.values).map(|(y, v)| v / y.exp()).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    outcome(
        lux_ok && dual <= SELF_DUAL_TOL && lo > 0.0 && hi.is_finite(),
        format!(
            "Luxemburg integrals {:?}; quadratic self-duality {dual:.1e} (tol {SELF_DUAL_TOL:.0e}); ψ_*(y)/e^y ∈ [{lo:.4}, {hi:.4}] for y ∈ [{}, {}]",
            lux.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>(),
            CONJUGATE_Y.0,
            CONJUGATE_Y.1
        ),
    )
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).into_iter().flatten().flatten() {
        let p = entry.path();
        if p.is_dir() {
            out.extend(csv_files(&p));
        } else if p.extension().is_some_and(|e| e == "csv" || e == "oscf") {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn determinism(first: &Path, out: &Path) -> Result<Outcome, String> {
    run_preset("taylor-green-shifted.json", Mode::Velocity, out)?;
    let (a, b) = (csv_files(first), csv_files(out));
    if a.len() != b.len() || a.is_empty() {
        return outcome(false, format!("file sets differ: {} vs {}", a.len(), b.len()));
    }
    let mut differing = Vec::new();
    for (x, y) in a.iter().zip(&b) {
        let same = x.strip_prefix(first).ok() == y.strip_prefix(out).ok()
            && std::fs::read(x).map_err(|e| e.to_string())? == std::fs::read(y).map_err(|e| e.to_string())?;
        if !same {
            differing.push(x.display().to_string());
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} CSV and snapshot files compared byte for byte; differing: {}", a.len(), differing.len()),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path().to_path_buf();
    let shifted_a = root.join("shifted-a");
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Result<Outcome, String> + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("spectral round trip, Parseval, Leray, semigroup law", Box::new(spectral)),
        ("Littlewood–Paley reconstruction and norm properties", Box::new(littlewood_paley)),
        ("Taylor–Green oracle", Box::new(|| taylor_green(false))),
        ("sector invariant and monitor bound", Box::new(|| taylor_green(true))),
        ("radius growth", Box::new(|| radius_growth(&shifted_a))),
        ("shift consistency", Box::new(|| shift_consistency(&root.join("shifted-c")))),
        ("lemma regression suite", Box::new(lemma_regression)),
        ("vorticity cross-check", Box::new(|| vorticity(&root.join("vorticity")))),
        ("Orlicz layer", Box::new(orlicz)),
        ("determinism", Box::new(|| determinism(&shifted_a, &root.join("shifted-b")))),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
