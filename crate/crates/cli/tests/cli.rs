use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn defaults() -> Value {
    json!({
        "b1": 1.0, "b1_bar": 1.0, "b2": 1.0, "b2_bar": 1.0, "sigma": 1.0,
        "q": 1.0, "q_bar": 1.0, "s": 0.5, "r": 1.0, "r_bar": 1.0, "s_bar": 0.5,
        "q_T": 1.0, "q_bar_T": 1.0, "s_T": 0.5, "xi_mean": 1.0, "xi_var": 0.0, "T": 1.0
    })
}

fn write_model(dir: &TempDir, name: &str, model: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(model).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfg-poa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn poa_json(model: &Path) -> Value {
    let out = run(&["poa", "--model", path(model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Rows of a sweep CSV as (value, poa, delta_sc, sc_mkv).
fn csv_rows(text: &str) -> Vec<(f64, f64, f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,value,poa,delta_sc,sc_mkv,valid"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 6, "{l}");
            assert_eq!(f[5], "true", "{l}");
            let n = |i: usize| f[i].parse::<f64>().unwrap();
            (n(1), n(2), n(3), n(4))
        })
        .collect()
}

fn sweep(model: &Path, param: &str, lo: &str, hi: &str, count: &str, extra: &[&str]) -> Output {
    let mut args = vec!["sweep", "--model", path(model), "--param", param, "--lo", lo, "--hi", hi, "--count", count];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn poa_at_defaults_exceeds_one_and_routes_agree() {
    let dir = TempDir::new().unwrap();
    let report = poa_json(&write_model(&dir, "m.json", &defaults()));
    let poa = report["poa"].as_f64().unwrap();
    assert!(poa > 1.0);
    let direct = report["delta_direct"].as_f64().unwrap();
    let prop = report["delta_prop2"].as_f64().unwrap();
    assert!((direct - prop).abs() <= 1e-8);
}

#[test]
fn zero_initial_mean_is_efficient() {
    let dir = TempDir::new().unwrap();
    let mut m = defaults();
    m["xi_mean"] = json!(0.0);
    let model = write_model(&dir, "m.json", &m);
    let poa = poa_json(&model)["poa"].as_f64().unwrap();
    assert!((poa - 1.0).abs() <= 1e-10);

    let out = run(&["efficiency", "--model", path(&model)]);
    assert!(out.status.success());
    let verdict: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdict["poa_is_one"], json!(true));
    assert_eq!(verdict["reason"], json!("MEAN_ZERO"));
}

#[test]
fn missing_key_is_a_parse_error_naming_it() {
    let dir = TempDir::new().unwrap();
    let mut m = defaults();
    m.as_object_mut().unwrap().remove("sigma");
    let out = run(&["poa", "--model", path(&write_model(&dir, "m.json", &m))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
}

#[test]
fn unreadable_file_and_bad_grid_exit_one() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["poa", "--model", path(&missing)]).status.code(), Some(1));
    let model = write_model(&dir, "m.json", &defaults());
    assert_eq!(run(&["poa", "--model", path(&model), "--grid-n", "2000"]).status.code(), Some(1));
}

#[test]
fn invalid_model_exits_two_with_violations() {
    let dir = TempDir::new().unwrap();
    let mut m = defaults();
    m["r"] = json!(-1.0);
    let out = run(&["poa", "--model", path(&write_model(&dir, "m.json", &m))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("validation") && err.contains('r'), "{err}");
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let out_path = dir.path().join("r.csv");
    let out = sweep(&model, "r", "1e-2", "1e3", "60", &["--preset", "full", "--out", path(&out_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&std::fs::read_to_string(&out_path).unwrap());
    assert_eq!(rows.len(), 60);
    assert_eq!(rows[0].0, 1e-2);
    assert_eq!(rows[59].0, 1e3);
}

#[test]
fn control_cost_tail_approaches_one() {
    // PoA − 1 peaks near r ≈ 50 at defaults, so the decay needs a few
    // more decades than 1e3 to fall below 1e-2.
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let out = sweep(&model, "r", "1e-2", "1e5", "71", &[]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let last = rows.last().unwrap();
    let decade_back = rows[rows.len() - 11];
    assert!((last.1 - 1.0).abs() < 1e-2);
    assert!((last.1 - 1.0).abs() < 0.5 * (decade_back.1 - 1.0).abs());
}

#[test]
fn mean_drift_tail_grows_faster_than_twofold_per_decade() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let out = sweep(&model, "b1_bar", "1e-2", "1e2", "41", &["--scale", "log"]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let last = rows.last().unwrap();
    let decade_back = rows[rows.len() - 11];
    assert_eq!(decade_back.0, 10.0f64.powf(1.0));
    assert!(last.1 > 2.0 * decade_back.1);
}

#[test]
fn single_row_sweep_matches_poa() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let poa = poa_json(&model)["poa"].as_f64().unwrap();
    let out = sweep(&model, "b2", "1", "1", "1", &[]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].1, poa);
}

#[test]
fn unknown_parameter_exits_three() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let out = sweep(&model, "gamma", "1", "2", "3", &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
}

#[test]
fn outputs_round_trip() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let report = poa_json(&model);
    let (gap, sc) = (report["delta_prop2"].as_f64().unwrap(), report["sc_mkv"].as_f64().unwrap());
    assert_eq!(1.0 + gap / sc, report["poa"].as_f64().unwrap());

    let out = sweep(&model, "q_bar", "0", "4", "9", &["--scale", "linear", "--preset", "states"]);
    for (_, poa, gap, sc) in csv_rows(&String::from_utf8(out.stdout).unwrap()) {
        assert_eq!(1.0 + gap / sc, poa);
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let a = sweep(&model, "b2_bar", "1e-3", "1e2", "25", &["--preset", "controls"]);
    let b = sweep(&model, "b2_bar", "1e-3", "1e2", "25", &["--preset", "controls"]);
    assert_eq!(a.stdout, b.stdout);
    let args = ["verify", "--model", path(&model), "--paths", "2000", "--steps", "200", "--grid-n", "401"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn verify_passes_at_defaults() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let out = run(&["verify", "--model", path(&model), "--paths", "100000", "--steps", "2000", "--seed", "42"]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert!(!table.contains("FAIL"));
    assert_eq!(table.matches("PASS").count(), 9);
}

#[test]
fn verify_noiseless_model() {
    let dir = TempDir::new().unwrap();
    let mut m = defaults();
    m["sigma"] = json!(0.0);
    let model = write_model(&dir, "m.json", &m);
    let out = run(&["verify", "--model", path(&model), "--paths", "2", "--steps", "4000", "--grid-n", "4001"]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{table}");
    let line = table.lines().find(|l| l.contains("noiseless")).unwrap();
    assert!(line.ends_with("PASS"));
}

#[test]
fn corrupted_closed_form_exits_four() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let out = run(&[
        "verify", "--model", path(&model), "--paths", "2000", "--steps", "200", "--perturb-closed-form", "1e-3",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn limits_for_one_parameter() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let out = run(&["limits", "--model", path(&model), "--param", "b2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let verdicts: Value = serde_json::from_slice(&out.stdout).unwrap();
    let verdicts = verdicts.as_array().unwrap();
    assert!(!verdicts.is_empty());
    assert!(verdicts.iter().all(|v| v["pass"] == json!(true)));
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", &defaults());
    let args = ["sweep", "--model", path(&model), "--param", "s", "--lo", "0", "--hi", "1", "--count", "11", "--scale", "linear"];
    let capped = Command::new(env!("CARGO_BIN_EXE_mfg-poa"))
        .args(args)
        .env("MFG_POA_THREADS", "1")
        .output()
        .unwrap();
    assert!(capped.status.success());
    assert_eq!(capped.stdout, run(&args).stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_mfg-poa"))
        .args(args)
        .env("MFG_POA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
