use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("gwd-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn gwd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwd")).args(args).output().unwrap()
}

fn run_scenario(dir: &Path, tag: &str, scenario: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.join(format!("{tag}.json"));
    fs::write(&cfg, scenario).unwrap();
    let out = dir.join(format!("{tag}-out"));
    let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (gwd(&args), out)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).unwrap_or_else(|| panic!("no diagnostic in {text}"));
    serde_json::from_str(line).unwrap()
}

const ZERO_EINSTEIN: &str = r#"{
  "command": "solve-einstein",
  "grid": {"theta": {"min": 0, "max": 1, "nodes": 9}, "eta": {"min": -1, "max": 1, "nodes": 5}, "v": {"min": 0, "max": 1, "nodes": 9}},
  "data": {"kind": "zero"}
}"#;

const PULSE_EINSTEIN: &str = r#"{
  "command": "solve-einstein",
  "grid": {"theta": {"min": 0, "max": 1, "nodes": 17}, "eta": {"min": -4, "max": 4, "nodes": 9}, "v": {"min": 0, "max": 1, "nodes": 9}},
  "data": {"kind": "pulse", "v": {"kind": "gaussian", "amplitude": 0.04, "theta_center": 0.5, "theta_width": 0.2, "eta_width": 1.5}}
}"#;

#[test]
fn empty_config_is_a_missing_command() {
    let d = scratch("empty");
    let (o, _) = run_scenario(&d, "empty", "", &[]);
    assert_eq!(o.status.code(), Some(1));
    let diag = stderr_json(&o);
    assert!(diag["message"].as_str().unwrap().contains("missing command"));
    assert_eq!(diag["exit_code"], 1);
}

#[test]
fn unknown_keys_exit_with_config_error() {
    let d = scratch("unknown");
    let (o, _) = run_scenario(&d, "bad", r#"{"command": "verify-ricci", "pionts": 4}"#, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pionts"));
}

#[test]
fn zero_data_gives_zero_snapshots_and_manifest() {
    let d = scratch("zero");
    let (o, out) = run_scenario(&d, "zero", ZERO_EINSTEIN, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["u", "v", "m", "y"] {
        let csv = fs::read_to_string(out.join(format!("{name}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("theta,eta,v,value"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 9 * 5 * 9);
        assert!(rows.iter().all(|r| r.ends_with(",0.0")), "{name}");
    }
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["report"]["constraint_max"], 0.0);
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["scenario_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["grids"][0]["n_eta"], 5);
    assert_eq!(manifest["tolerances"]["options"]["tolerance"], 1e-12);
}

#[test]
fn identical_runs_are_byte_identical() {
    let d = scratch("determinism");
    let (a, out_a) = run_scenario(&d, "a", PULSE_EINSTEIN, &["--seed", "3", "--threads", "2"]);
    let (b, out_b) = run_scenario(&d, "b", PULSE_EINSTEIN, &["--seed", "3"]);
    assert!(a.status.success() && b.status.success());
    for f in ["u.csv", "v.csv", "m.csv", "y.csv", "report.json"] {
        assert_eq!(fs::read(out_a.join(f)).unwrap(), fs::read(out_b.join(f)).unwrap(), "{f}");
    }
    let (ma, mb) = (read_json(&out_a.join("manifest.json")), read_json(&out_b.join("manifest.json")));
    assert_eq!(ma["scenario_sha256"], mb["scenario_sha256"]);
}

#[test]
fn command_line_subcommand_supplies_the_command() {
    let d = scratch("subcommand");
    let cfg = d.join("c.json");
    fs::write(&cfg, r#"{"points": 3, "seed": 5}"#).unwrap();
    let out = d.join("out");
    let o = gwd(&["verify-ricci", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("report.json"));
    assert_eq!(r["report"]["points"], 3);
    assert_eq!(r["report"]["seed"], 5);
    assert!(r["report"]["max_defect"].as_f64().unwrap() < 1e-6);
}

#[test]
fn failed_verification_exits_3() {
    let d = scratch("verify-fail");
    let (o, out) = run_scenario(&d, "r", r#"{"command": "verify-ricci", "points": 2, "threshold": 1e-300}"#, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["kind"], "verification");
    assert_eq!(read_json(&out.join("report.json"))["status"], "fail");
}

#[test]
fn blow_up_exits_2_with_location() {
    let d = scratch("blowup");
    let s = r#"{
      "command": "solve-hs",
      "grid": {"theta": {"min": 0, "max": 1, "nodes": 17}, "v": {"min": 0, "max": 1, "nodes": 401}},
      "profile": {"kind": "monomial", "coeff": -2.0, "p_theta": 1},
      "coefficients": {"lambda": {"kind": "constant", "value": 1.0}},
      "options": {"gradient_cap": 10.0}
    }"#;
    let (o, _) = run_scenario(&d, "hs", s, &[]);
    assert_eq!(o.status.code(), Some(2));
    let diag = stderr_json(&o);
    assert_eq!(diag["blow_up"]["kind"], "gradient");
    assert!((diag["blow_up"]["v"].as_f64().unwrap() - 0.8).abs() < 0.01);
}

#[test]
fn classify_reports_verdicts() {
    let d = scratch("classify");
    let s = r#"{
      "command": "classify",
      "system": {"kind": "scalar_wave", "space_dims": 2, "speed": [1.0, 1.0]},
      "samples": {"g0": [[0.0], [0.5]], "wave_vectors": [[1.0, 0.0], [0.3, 0.4]], "du": [[1.0, 0.0, 0.0]]}
    }"#;
    let (o, out) = run_scenario(&d, "c", s, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("report.json"));
    assert_eq!(r["report"]["verdict"], "genuinely_nonlinear_candidate");
    assert_eq!(r["report"]["samples"].as_array().unwrap().len(), 8);
    assert_eq!(r["report"]["rejected"].as_array().unwrap().len(), 2);
    let s = s.replace("[1.0, 1.0]", "[2.0]");
    let (_, out) = run_scenario(&d, "c2", &s, &[]);
    assert_eq!(read_json(&out.join("report.json"))["report"]["verdict"], "linearly_degenerate");
}

#[test]
fn converge_reports_observed_order() {
    let d = scratch("converge");
    let s = r#"{
      "command": "converge",
      "study": {
        "problem": "colliding",
        "u": {"kind": "log_linear", "scale": -1.0, "offset": 2.0, "c_theta": 1.0, "c_v": 1.0},
        "grid": {"theta": {"min": 0, "max": 1, "nodes": 0}, "v": {"min": 0, "max": 1, "nodes": 0}},
        "ladder": [[17, 1, 17], [33, 1, 33], [65, 1, 65]],
        "options": {"constraint_tolerance": null}
      },
      "expected_order": 2.0
    }"#;
    let (o, out) = run_scenario(&d, "conv", s, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("report.json"));
    let p = r["report"]["observed_order"].as_f64().unwrap();
    assert!((p - 2.0).abs() < 0.3, "{r}");
    assert_eq!(read_json(&out.join("manifest.json"))["grids"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_action_reads_snapshots_of_a_previous_run() {
    let d = scratch("action");
    let wide = PULSE_EINSTEIN.replace(r#""nodes": 9}, "v""#, r#""nodes": 17}, "v""#);
    let (o, solved) = run_scenario(&d, "solve", &wide, &[]);
    assert!(o.status.success());
    let s = format!(r#"{{"command": "verify-action", "fields": {{"kind": "snapshots", "dir": {:?}}}, "probes": 2}}"#, solved.to_str().unwrap());
    let (o, out) = run_scenario(&d, "act", &s, &["--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("report.json"));
    assert_eq!(r["report"]["probe_seed"], 9);
    assert_eq!(r["report"]["residuals_by_direction"].as_array().unwrap().len(), 5);
}
