use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multislit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const NATURAL: &str = r#"{
  "units": "natural",
  "mode": "double",
  "geometry": { "slit_width": 0.2, "grating": { "kind": "ideal", "tprime": 1.1 } },
  "numerics": { "n_points": 4096, "extent_T": 32 }
}"#;

fn paper(mode: &str) -> String {
    format!(
        r#"{{
  "units": "si",
  "mode": "{mode}",
  "geometry": {{
    "L_m": 0.55, "lambda_m": "infer", "T_m": 0.25e-3, "slit_width_m": 0.04e-3,
    "grating": {{ "kind": "wires", "n_wires": 6, "wire_width_m": 0.127e-3, "wire_spacing_m": 1.3e-3 }}
  }}
}}"#
    )
}

fn csv_column(path: &Path, row_key: &str, column: usize) -> f64 {
    let text = fs::read_to_string(path).unwrap();
    let line = text.lines().find(|l| l.starts_with(row_key)).unwrap_or_else(|| panic!("{row_key} in {path:?}"));
    line.split(',').nth(column).unwrap().parse().unwrap()
}

#[test]
fn simulate_writes_tables_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", NATURAL);
    let out = tmp.path().join("run");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for stage in ["prepared", "after_grating", "imaged"] {
        let pos = fs::read_to_string(out.join(format!("stage_{stage}_position.csv"))).unwrap();
        assert!(pos.starts_with("x [T],|psi|^2 [1/T]\n"));
        assert!(!pos.contains('\r'));
        assert_eq!(pos.lines().count(), 4097);
        let mom = fs::read_to_string(out.join(format!("stage_{stage}_momentum.csv"))).unwrap();
        assert!(mom.starts_with("k [1/T],|psi~|^2 [T]\n"));
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("stage,probability [1],"));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["config"]["sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["started_utc"].as_str().unwrap().ends_with('Z'));
    let files: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|f| f["file"].as_str().unwrap()).collect();
    assert!(files.contains(&"summary.csv") && files.contains(&"stage_imaged_position.csv"));
}

#[test]
fn simulate_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", NATURAL);
    let dirs = ["a", "b"].map(|d| tmp.path().join(d));
    for d in &dirs {
        assert_eq!(code(&run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()])), 0);
    }
    let mut names: Vec<_> = fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")) {
        assert_eq!(fs::read(dirs[0].join(name)).unwrap(), fs::read(dirs[1].join(name)).unwrap(), "{name:?}");
    }
    let hash = |d: &Path| {
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("manifest.json")).unwrap()).unwrap();
        m["config"]["sha256"].clone()
    };
    assert_eq!(hash(&dirs[0]), hash(&dirs[1]));
}

#[test]
fn paper_double_slit_reports_both_leakage_figures() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", &paper("double"));
    let out = tmp.path().join("run");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let model = csv_column(&out.join("run.csv"), "eigenstate_leakage", 1);
    assert!((model - 0.0104).abs() < 5e-4, "{model}");
    let image = csv_column(&out.join("summary.csv"), "imaged", 4);
    assert!((image - 0.001158).abs() < 1e-5, "{image}");
}

#[test]
fn slit_wider_than_period_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", &paper("double").replace("0.04e-3", "0.3e-3"));
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("slit width"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_missing_files_are_config_errors() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", &NATURAL.replace("\"mode\"", "\"colour\": 1, \"mode\""));
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("colour"));
    let o = run(&["simulate", "--config", "/nonexistent.json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run(&["simulate"])), 2);
}

#[test]
fn eigenstate_residuals_and_strict_inequality() {
    let tmp = TempDir::new().unwrap();
    let ok = write(tmp.path(), "e.json", r#"{"a": 0.23, "T": 1, "Tprime": 1.1}"#);
    let out = tmp.path().join("e");
    let o = run(&["eigenstate", "--config", ok.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = out.join("summary.csv");
    assert!(csv_column(&summary, "position_residual", 1) < 1e-6);
    assert!(csv_column(&summary, "momentum_residual", 1) < 1e-6);

    let equal = write(tmp.path(), "eq.json", r#"{"a": 0.23, "T": 1, "Tprime": 1}"#);
    let o = run(&["eigenstate", "--config", equal.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let wide = write(tmp.path(), "w.json", r#"{"a": 1.2, "T": 1, "Tprime": 1.1}"#);
    assert_eq!(code(&run(&["eigenstate", "--config", wide.to_str().unwrap(), "--out", out.to_str().unwrap()])), 2);
}

#[test]
fn flat_window_gives_equal_replicas() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "e.json", r#"{"a": 0.23, "T": 1, "momentum_window": "flat", "flat_half_width": 0.05}"#);
    let out = tmp.path().join("e");
    assert_eq!(code(&run(&["eigenstate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let text = fs::read_to_string(out.join("replicas.csv")).unwrap();
    let masses: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    let first = masses[0];
    assert!(masses.len() > 10);
    assert!(masses.iter().all(|m| (m - first).abs() < 1e-12));
}

#[test]
fn validate_passes_and_catches_a_flipped_kernel() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("v");
    let o = run(&["validate", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    for n in 1..=4 {
        assert!(stdout.contains(&format!("[X, Y] n = {n}")));
    }
    assert!(stdout.contains("incommensurate"));
    assert!(fs::read_to_string(out.join("validate.csv")).unwrap().starts_with("group,check,value [1],"));

    let o = run(&["validate", "--inject-fault", "flipped-kernel"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("parity = F^2"), "{}", stderr(&o));
}

#[test]
fn sweep_errors() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", NATURAL);
    let c = cfg.to_str().unwrap();
    let out = tmp.path().join("s");
    let o = run(&["sweep", "--config", c, "--param", "colour", "--values", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("colour"));
    assert_eq!(code(&run(&["sweep", "--config", c, "--param", "tprime", "--values", "", "--out", out.to_str().unwrap()])), 2);
    // wire count does not apply to an ideal grating
    assert_eq!(code(&run(&["sweep", "--config", c, "--param", "n_wires", "--values", "1", "--out", out.to_str().unwrap()])), 2);
}

fn sweep_column(out: &Path, column: usize) -> Vec<f64> {
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    text.lines().skip(1).map(|l| l.split(',').nth(column).unwrap().parse().unwrap()).collect()
}

#[test]
fn single_slit_transmission_falls_with_wire_count() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", &paper("single"));
    let out = tmp.path().join("s");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--param", "n_wires", "--values", "0..10", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(fs::read_to_string(out.join("sweep.csv")).unwrap().starts_with("n_wires [1],transmitted [1],"));
    let t = sweep_column(&out, 1);
    assert_eq!(t.len(), 11);
    assert!((t[0] - 1.0).abs() < 1e-12);
    assert!(t.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{t:?}");
}

#[test]
fn grid_refinement_converges() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", &paper("double"));
    let out = tmp.path().join("s");
    let o = run(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--param", "n_points", "--values", "51200,102400,204800",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let leak = sweep_column(&out, 2);
    assert!((leak[2] - leak[1]).abs() < 1e-4 && (leak[1] - leak[0]).abs() < 1e-4, "{leak:?}");
}
