use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn osc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osc")).args(args).output().expect("spawn osc")
}

fn small_config(dir: &Path, name: &str, mut patch: impl FnMut(&mut Value)) -> PathBuf {
    let mut cfg = json!({
        "solver": {
            "grid": { "dim": 2, "n": 16 },
            "horizon": 0.05,
            "alpha": [0.01, 0.0],
            "initial": [
                { "kind": "taylor_green", "amplitude": 1e-3 },
                { "kind": "white_band", "amplitude": 2e-4, "k_min": 1, "k_max": 4, "seed": 2 }
            ],
            "probe_times": [0.01, 0.05]
        }
    });
    patch(&mut cfg);
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn run(cfg: &Path, out: &Path) -> Output {
    osc(&["run-nse", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_the_documented_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "c.json", |_| {});
    let out = tmp.path().join("run");
    let o = run(&cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["manifest.json", "config.json", "monitors.csv", "residuals.csv", "radius.csv", "domain_norms.csv", "report.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert!(out.join("snapshots/index.csv").is_file());
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["calibration"]["source"], "embedded");
    let monitors = std::fs::read_to_string(out.join("monitors.csv")).unwrap();
    assert!(monitors.starts_with("n,weighted_linf,"));
    assert!(monitors.lines().count() >= 2);
}

#[test]
fn unsupported_p_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "c.json", |c| c["solver"]["p"] = json!(3.0));
    let o = osc(&["run-vorticity", cfg.to_str().unwrap(), "--output", tmp.path().join("r").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn oversized_alpha_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "c.json", |c| c["solver"]["alpha"] = json!([50.0, 0.0]));
    let o = run(&cfg, &tmp.path().join("r"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("alpha") || stderr(&o).contains("α"), "{}", stderr(&o));
}

#[test]
fn corrupted_calibration_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cal.json"), "{ \"version\": 1, \"iteration_constant\": ").unwrap();
    let cfg = small_config(tmp.path(), "c.json", |c| c["calibration"] = json!("cal.json"));
    let o = run(&cfg, &tmp.path().join("r"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_config_field_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "c.json", |c| c["solver"]["horizn"] = json!(1.0));
    assert_eq!(run(&cfg, &tmp.path().join("r")).status.code(), Some(2));
}

#[test]
fn unknown_subcommand_arguments_exit_with_config_code() {
    assert_eq!(osc(&["table", "bogus"]).status.code(), Some(2));
    assert_eq!(osc(&["verify", "--lemma", "bogus"]).status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "c.json", |_| {});
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&cfg, &a).status.code(), Some(0));
    assert_eq!(run(&cfg, &b).status.code(), Some(0));
    for f in ["monitors.csv", "residuals.csv", "radius.csv", "domain_norms.csv", "snapshots/index.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn weights_table_columns() {
    let o = osc(&["table", "weights"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 10);
    assert_eq!(header[0], "t");
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v.len(), 10);
        assert!(v.iter().all(|x| x.is_finite() && *x >= 0.0));
    }
}

#[test]
fn horizon_shrinks_with_data() {
    let o = osc(&["table", "horizons"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "t_star").unwrap();
    let t: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert!(t.len() >= 2);
    assert!(t.windows(2).all(|w| w[1] < w[0]), "{t:?}");
}

#[test]
fn verify_single_lemma_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = osc(&["verify", "--lemma", "frac-heat", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("summary.json").is_file());
    assert!(std::fs::read_dir(out.join("bounds")).unwrap().count() > 0);
}
