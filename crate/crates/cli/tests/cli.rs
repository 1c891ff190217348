use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn crflow(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crflow"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CRFLOW_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const STATIONARY: &str = r#"{
  "background": {"kind": "poincare_disc", "dim": 1},
  "initial": {"profile": "stationary"},
  "grid": {"n_nodes": 65, "rho_hat_max": 6},
  "horizon": 1
}"#;

const DEGENERATE: &str = r#"{
  "background": {"kind": "poincare_disc", "dim": 1},
  "initial": {"profile": "degenerate"},
  "hypothesis": {"s": 1, "beta": 0.5},
  "grid": {"n_nodes": 129, "rho_hat_max": 10},
  "horizon": 1
}"#;

fn stationary_run(dir: &Path) -> PathBuf {
    let cfg = write_config(dir, "stationary.json", STATIONARY);
    let out = dir.join("run");
    let o = crflow(&["run", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn stationary_run_writes_artifacts_with_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out = stationary_run(dir.path());
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["sup_abs_u"], 0.0);
    let digest = summary["config_digest"].as_str().unwrap().to_string();
    assert_eq!(digest.len(), 64);

    let doc = read_json(&out.join("trajectory.json"));
    assert_eq!(doc["config_digest"], digest.as_str());
    assert!(doc["tool_version"].as_str().unwrap().starts_with("crflow "));
    assert_eq!(doc["config"]["grid"]["n_nodes"], 65);

    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().contains(&format!("config_digest={digest}")));
    assert_eq!(lines.next().unwrap(), "t,node,rho_hat,u,udot,metric_ratio");
    assert_eq!(lines.next().unwrap(), "0,0,0,0,0,1");
}

#[test]
fn degenerate_without_regularization_needs_the_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "deg.json", DEGENERATE);
    let o = crflow(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ladder"));
}

#[test]
fn missing_field_is_a_config_error_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", &STATIONARY.replace(r#""n_nodes": 65, "#, ""));
    let o = crflow(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("/grid") && err.contains("n_nodes"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&crflow(&["run"], dir.path())), 1);
    assert_eq!(code(&crflow(&["frobnicate"], dir.path())), 1);
}

#[test]
fn single_eps_schedule_has_no_limit() {
    let dir = tempfile::tempdir().unwrap();
    let body = DEGENERATE.replace(r#""horizon": 1"#, r#""horizon": 1, "ladder": {"eps": [0.1]}"#);
    let cfg = write_config(dir.path(), "one.json", &body);
    let out = dir.path().join("out");
    let o = crflow(&["sweep", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 4);
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["diagonal"]["certified"], false);
}

#[test]
fn default_degenerate_sweep_certifies_and_repeats_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "deg.json", DEGENERATE);
    let mut manifests = Vec::new();
    for (k, jobs) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("sweep{k}"));
        let o = crflow(&["sweep", "--config", cfg.to_str().unwrap(), "--jobs", jobs], &out);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        let trajectories = std::fs::read_dir(&out)
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("traj_"))
            .count();
        assert_eq!(trajectories, 9);
        assert!(out.join("traj_eps1.000e-3_rmax0040.000.json").exists());
        let mut m = read_json(&out.join("manifest.json"));
        assert_eq!(m["diagonal"]["candidate"], serde_json::json!([1e-3, 40.0]));
        m.as_object_mut().unwrap().remove("timestamp");
        manifests.push(serde_json::to_string(&m).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
}

#[test]
fn stationary_trajectory_passes_all_checks() {
    let dir = tempfile::tempdir().unwrap();
    let run = stationary_run(dir.path());
    let out = dir.path().join("checks");
    let o = crflow(&["check", run.join("trajectory.json").to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let summary = read_json(&out.join("check_summary.json"));
    assert_eq!(summary["pass"], true);
    assert!(out.join("check_upper_bounds.json").exists());
    let csv = std::fs::read_to_string(out.join("check_upper_bounds.u.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("name,t,value"));
}

#[test]
fn corrupted_snapshot_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let run = stationary_run(dir.path());
    let mut doc = read_json(&run.join("trajectory.json"));
    doc["snapshots"][1]["metric_ratio"][3] = serde_json::json!(-0.25);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = crflow(&["check", bad.to_str().unwrap()], &dir.path().join("checks"));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid snapshot"));
}

#[test]
fn long_homogeneous_run_settles_to_the_einstein_metric() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{
      "background": {"kind": "poincare_disc", "dim": 1},
      "initial": {"profile": {"homogeneous": 0.5}},
      "grid": {"n_nodes": 257, "rho_hat_max": 10},
      "horizon": 15,
      "checkpoints": [5, 10]
    }"#;
    let cfg = write_config(dir.path(), "hom.json", body);
    let run = dir.path().join("run");
    assert_eq!(code(&crflow(&["run", "--config", cfg.to_str().unwrap()], &run)), 0);
    let out = dir.path().join("checks");
    let o = crflow(
        &["check", run.join("trajectory.json").to_str().unwrap(), "--checks", "ke_residual"],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let ke = read_json(&out.join("check_ke_residual.json"));
    assert!(ke["reports"][0]["sup_or_inf"].as_f64().unwrap() <= 1e-3);
    // tightening the threshold past the discretization floor fails the check
    let o = crflow(
        &["check", run.join("trajectory.json").to_str().unwrap(), "--checks", "ke_residual", "--ke-threshold", "1e-12"],
        &out,
    );
    assert_eq!(code(&o), 5);
}

#[test]
fn unknown_check_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let run = stationary_run(dir.path());
    let o = crflow(&["check", run.join("trajectory.json").to_str().unwrap(), "--checks", "nope"], dir.path());
    assert_eq!(code(&o), 1);
}

fn snapshot_arrays(doc: &Value, k: usize) -> Vec<f64> {
    let s = &doc["snapshots"][k];
    ["u", "udot", "metric_ratio"]
        .iter()
        .flat_map(|f| s[f].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()))
        .collect()
}

#[test]
fn convert_rescales_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{
      "background": {{"kind": "poincare_disc", "dim": 1}},
      "initial": {{"profile": {{"homogeneous": 0.5}}}},
      "grid": {{"n_nodes": 33, "rho_hat_max": 4}},
      "horizon": 1,
      "checkpoints": [{}]
    }}"#,
        std::f64::consts::LN_2
    );
    let cfg = write_config(dir.path(), "hom.json", &body);
    let run = dir.path().join("run");
    assert_eq!(code(&crflow(&["run", "--config", cfg.to_str().unwrap()], &run)), 0);
    let src = run.join("trajectory.json");
    let conv = dir.path().join("conv");
    assert_eq!(code(&crflow(&["convert", src.to_str().unwrap(), "--direction", "unnormalized"], &conv)), 0);
    let unn = conv.join("trajectory_unnormalized.json");
    let a = read_json(&src);
    let b = read_json(&unn);
    assert_eq!(b["frame"], "unnormalized");
    assert_eq!(b["config_digest"], a["config_digest"]);

    // t = 0 is s = 0 with identical arrays
    assert_eq!(b["snapshots"][0]["t"], 0.0);
    assert_eq!(snapshot_arrays(&a, 0), snapshot_arrays(&b, 0));

    // t = ln 2 is s = 1 with the metric ratio doubled
    let k = a["snapshots"]
        .as_array()
        .unwrap()
        .iter()
        .position(|s| s["t"].as_f64().unwrap() == std::f64::consts::LN_2)
        .unwrap();
    assert!((b["snapshots"][k]["t"].as_f64().unwrap() - 1.0).abs() <= f64::EPSILON);
    let ra = a["snapshots"][k]["metric_ratio"].as_array().unwrap();
    let rb = b["snapshots"][k]["metric_ratio"].as_array().unwrap();
    for (x, y) in ra.iter().zip(rb) {
        let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
        assert!((y - 2.0 * x).abs() <= 4.0 * f64::EPSILON * y.abs(), "{x} {y}");
    }

    // converting back reproduces the ratios within one ulp; converting twice is an error
    let back = dir.path().join("back");
    assert_eq!(code(&crflow(&["convert", unn.to_str().unwrap(), "--direction", "normalized"], &back)), 0);
    assert_eq!(code(&crflow(&["convert", unn.to_str().unwrap(), "--direction", "unnormalized"], &back)), 1);
    let c = read_json(&back.join("trajectory_unnormalized_normalized.json"));
    let ulp = |x: f64, y: f64| (x.to_bits() as i64).abs_diff(y.to_bits() as i64);
    for (sa, sc) in a["snapshots"].as_array().unwrap().iter().zip(c["snapshots"].as_array().unwrap()) {
        assert!(ulp(sa["t"].as_f64().unwrap(), sc["t"].as_f64().unwrap()) <= 1);
        for (x, y) in sa["metric_ratio"].as_array().unwrap().iter().zip(sc["metric_ratio"].as_array().unwrap()) {
            assert!(ulp(x.as_f64().unwrap(), y.as_f64().unwrap()) <= 1);
        }
    }
}

#[test]
fn out_directory_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "stationary.json", STATIONARY);
    let out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_crflow"))
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("CRFLOW_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(out.join("summary.json").exists());
}
