use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::semigroup::heat_apply;
use crate::spectral::{evaluate_complex_shift, Grid};

fn config(d: usize, n: usize, horizon: f64, initial: Vec<DataPiece>) -> IterationConfig {
    IterationConfig {
        grid: Grid::new(d, n, 2.0 * PI).unwrap(),
        horizon,
        time_grid: TimeGridSpec::default(),
        alpha: vec![],
        initial,
        forcing: ForcingSpec::default(),
        max_iterations: 30,
        tolerance: 1e-13,
        mode: Mode::Velocity,
        p: 2.0,
        constant: Some(1.0),
        seed: 0,
        probe_times: vec![],
    }
}

fn band(amplitude: f64, seed: u64) -> DataPiece {
    DataPiece::WhiteBand { amplitude, k_min: 1.0, k_max: 4.0, seed }
}

fn run(cfg: &IterationConfig) -> (IterationState, ConvergenceReport) {
    Iteration::new(cfg, &Calibration::embedded()).unwrap().run().unwrap()
}

#[test]
fn zero_data_converges_in_one_step_to_zero() {
    let (state, report) = run(&config(2, 16, 0.1, vec![]));
    assert!(report.converged);
    assert_eq!(report.iterations, 1);
    assert!(state.fields.iter().all(|p| p.re.is_zero() && p.im.is_zero()));
    assert_eq!(report.max_residual, 0.0);
}

#[test]
fn unshifted_free_iterate_is_the_heat_flow() {
    let cfg = config(2, 16, 0.1, vec![band(0.1, 4)]);
    let it = Iteration::new(&cfg, &Calibration::embedded()).unwrap();
    let s = it.init().unwrap();
    let u0 = cfg.initial_velocity().unwrap();
    for (t, p) in s.times.iter().zip(&s.fields) {
        assert!(p.im.is_zero());
        let gap = p.re.sub(&heat_apply(&u0, *t).unwrap()).unwrap().max_coeff();
        assert!(gap < 1e-16, "t={t} gap={gap}");
    }
    assert_eq!(s.fields[0].re, u0);
}

#[test]
fn shifted_free_iterate_matches_mode_ode() {
    // Û' = −|k|²Û − i(α·k)V̂, V̂' = −|k|²V̂ + i(α·k)Û, V̂(0) = 0:
    // Û = e^{−|k|²t}cosh(at)û₀, V̂ = i e^{−|k|²t}sinh(at)û₀ with a = α·k.
    let terms = vec![TrigTerm { freq: vec![2, 1], cos: vec![0.1, -0.2], sin: vec![] }];
    let mut cfg = config(2, 16, 0.2, vec![DataPiece::Modes { terms }]);
    cfg.alpha = vec![0.1, 0.0];
    let it = Iteration::new(&cfg, &Calibration::embedded()).unwrap();
    let s = it.init().unwrap();
    let g = cfg.grid;
    let u0 = cfg.initial_velocity().unwrap();
    for (t, p) in s.times.iter().zip(&s.fields) {
        for i in 0..g.len() {
            let a: f64 = 0.1 * g.wavevector(i)[0];
            let e = (-g.k_squared(i) * t).exp();
            for c in 0..2 {
                let z0 = u0.coeffs(c)[i];
                let u = z0 * e * (a * t).cosh();
                let v = Complex64::i() * z0 * e * (a * t).sinh();
                assert!((p.re.coeffs(c)[i] - u).norm() < 1e-15);
                assert!((p.im.coeffs(c)[i] - v).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn imaginary_sector_stays_exactly_zero() {
    let mut cfg = config(2, 16, 0.1, vec![band(0.2, 1)]);
    cfg.forcing.terms = vec![TrigTerm { freq: vec![1, 1], cos: vec![0.3, -0.3], sin: vec![] }];
    cfg.max_iterations = 3;
    let it = Iteration::new(&cfg, &Calibration::embedded()).unwrap();
    let mut s = it.init().unwrap();
    for _ in 0..3 {
        s = it.step(&s).unwrap();
        assert!(s.fields.iter().all(|p| p.im.is_zero()));
    }
}

#[test]
fn taylor_green_limit_is_exponential_decay() {
    let mut cfg = config(2, 32, 0.2, vec![DataPiece::TaylorGreen { amplitude: 1e-3 }]);
    cfg.probe_times = vec![0.02, 0.05, 0.1, 0.2];
    let (state, report) = run(&cfg);
    assert!(report.converged);
    let u0 = cfg.initial_velocity().unwrap();
    for (t, p) in state.times.iter().zip(&state.fields) {
        let gap = crate::spaces::linf_norm(&p.re.sub(&u0.scale((-2.0 * t).exp())).unwrap());
        assert!(gap < 1e-15, "t={t} gap={gap}");
    }
    assert!(report.max_residual < 1e-15);
    assert_eq!(report.residuals.len(), 4);
    assert!(report.monitor_bound_holds);
    assert!(report.divergence_defect < 1e-10);
}

#[test]
fn first_correction_vanishes_for_taylor_green() {
    // (U⁰·∇)U⁰ is a gradient, so the Duhamel correction of the first step is zero
    let cfg = config(2, 32, 0.1, vec![DataPiece::TaylorGreen { amplitude: 1e-2 }]);
    let s0 = init_iterate(&cfg).unwrap();
    let s1 = step_iterate(&s0, &cfg).unwrap();
    assert!(s1.differences[0] < 1e-6);
    assert!(s1.differences[0] < 1e-15);
}

#[test]
fn small_data_contracts_and_residual_is_small() {
    let mut cfg = config(2, 16, 0.1, vec![band(0.05, 7)]);
    cfg.forcing.terms = vec![TrigTerm { freq: vec![1, -1], cos: vec![0.1, 0.1], sin: vec![] }];
    cfg.alpha = vec![0.05, 0.02];
    let (_, report) = run(&cfg);
    assert!(report.converged, "{:?}", report.differences);
    assert!(report.contracting);
    assert!(report.contraction_ratios.iter().take(3).all(|&r| r < 0.9), "{:?}", report.contraction_ratios);
    assert!(report.max_residual < 1e-6, "{}", report.max_residual);
    assert!(report.leray_gap < 1e-12);
    assert!(report.divergence_defect < 1e-10);
    assert!(report.max_imaginary > 0.0);
}

#[test]
fn shifted_run_is_the_complex_shift_of_the_unshifted_run() {
    let mut cfg = config(2, 16, 0.1, vec![band(0.1, 3)]);
    let (base, _) = run(&cfg);
    cfg.alpha = vec![0.08, -0.05];
    let (shifted, _) = run(&cfg);
    for (j, &t) in base.times.iter().enumerate() {
        let y = [0.08 * t, -0.05 * t];
        let ev = evaluate_complex_shift(&base.fields[j].re, &y).unwrap();
        let (re, im) = (shifted.fields[j].re.to_real_values(), shifted.fields[j].im.to_real_values());
        let mut gap: f64 = 0.0;
        for c in 0..2 {
            for i in 0..cfg.grid.len() {
                gap = gap.max((ev.values[c][i] - Complex64::new(re[c][i], im[c][i])).norm());
            }
        }
        assert!(gap < 1e-5, "t={t} gap={gap}");
    }
}

#[test]
fn vorticity_limit_is_curl_of_velocity_limit() {
    let mut cfg = config(3, 16, 0.1, vec![DataPiece::TaylorGreen { amplitude: 0.2 }]);
    cfg.time_grid.h_max = Some(0.01);
    let (vel, vr) = run(&cfg);
    cfg.mode = Mode::Vorticity;
    let (vor, wr) = run(&cfg);
    assert!(vr.converged && wr.converged);
    for (a, b) in vel.fields.iter().zip(&vor.fields) {
        let gap = crate::spaces::linf_norm(&curl(&a.re).unwrap().sub(&b.re).unwrap());
        assert!(gap < 1e-10, "{gap}");
    }
    let m = wr.monitors.last().unwrap();
    assert!(m.recovered_velocity.unwrap() > 0.0);
    assert!(wr.velocity_ratio.unwrap() > 0.0);
}

#[test]
fn oversized_shift_is_a_config_error() {
    let mut cfg = config(2, 16, 0.1, vec![band(0.1, 3)]);
    let bound = shift_bound(0.1, 1.0).unwrap();
    cfg.alpha = vec![1.01 * bound, 0.0];
    assert!(matches!(Iteration::new(&cfg, &Calibration::embedded()), Err(OscError::Config(_))));
    cfg.alpha = vec![0.99 * bound, 0.0];
    assert!(Iteration::new(&cfg, &Calibration::embedded()).is_ok());
}

#[test]
fn large_data_blows_up_with_divergence_error() {
    let mut cfg = config(2, 16, 1.0, vec![band(40.0, 2)]);
    cfg.max_iterations = 40;
    let it = Iteration::new(&cfg, &Calibration::embedded()).unwrap();
    assert!(it.setup().horizon_exceeded);
    match it.run() {
        Err(OscError::Divergence { iterate, .. }) => assert!(iterate >= 1),
        Ok((_, r)) => assert!(!r.converged && !r.contracting, "{:?}", r.differences),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn runs_are_deterministic() {
    let mut cfg = config(2, 16, 0.1, vec![band(0.1, 9)]);
    cfg.alpha = vec![0.03, 0.0];
    let (a, ra) = run(&cfg);
    let (b, rb) = run(&cfg);
    assert_eq!(ra, rb);
    assert!(a.fields.iter().zip(&b.fields).all(|(x, y)| x == y));
}
