use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emden-fowler")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).expect("valid json")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn constants_of_the_model() {
    let out = run(&["constants"]);
    assert_eq!(code(&out), 0);
    let v = json(&stdout(&out));
    assert_eq!(v["A"], 20.0);
    assert_eq!(v["B"], 64.0);
    assert_eq!(v["a0"], 8.0);
    assert_eq!(v["lambda_d"], 16.0);
    assert_eq!(v["mu_d"], 4.0);
    for key in ["n", "beta", "b", "lambda_s", "mu_s"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        vec!["constants", "--n", "4"],
        vec!["constants", "--g", "power:0.5"],
        vec!["constants", "--g", "beta=64;mono=1,3"],
        vec!["constants", "--g", "nonsense"],
        vec!["orbit", "--a", "9"],
        vec!["orbit", "--a", "-1"],
        vec!["orbit", "--a", "4", "--rel-tol", "2"],
        vec!["sweep", "--a-min", "2", "--a-max", "1", "--steps", "3"],
        vec!["homoclinic", "--epsilon", "0"],
        vec!["verify", "--orbit-file", "/nonexistent/orbit.json"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn solver_failure_exits_3() {
    let out = run(&["homoclinic", "--method", "continuation", "--continuation-steps", "1"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("solver failure"));
}

#[test]
fn sweep_csv_and_failed_rows() {
    let out = run(&["sweep", "--a-min", "2", "--a-max", "6", "--steps", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,c,L,E,v_max"));
    let periods: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(periods.len(), 3);
    assert!(periods.windows(2).all(|w| w[1] < w[0]));

    let out = run(&["sweep", "--a-min", "4", "--a-max", "9", "--steps", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().last(), Some("9,ERROR,ERROR,ERROR,ERROR"));
    assert!(stderr(&out).contains("1 of 2 rows failed"));

    let out = run(&["sweep", "--a-min", "1", "--a-max", "2", "--steps", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "a,c,L,E,v_max\n");
}

#[test]
fn orbit_files_verify_and_edits_are_caught() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("orbit.json");
    let csv = dir.path().join("orbit.csv");
    let svg = dir.path().join("orbit.svg");
    let out = run(&["orbit", "--a", "4", "--out-json", path(&file), "--out-csv", path(&csv), "--out-svg", path(&svg)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let orbit = json(&fs::read_to_string(&file).unwrap());
    assert_eq!(orbit["kind"], "periodic");
    assert_eq!(orbit["diagnostics"]["verify"]["passed"], true);
    assert!(fs::read_to_string(&csv).unwrap().starts_with("t,v,v1,v2,v3,E\n"));
    assert!(fs::read_to_string(&svg).unwrap().contains("<polyline"));

    let out = run(&["verify", "--orbit-file", path(&file)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&stdout(&out))["passed"], true);

    let mut edited = orbit.clone();
    edited["v_max"] = Value::from(orbit["v_max"].as_f64().unwrap() + 0.01);
    let bad = dir.path().join("edited.json");
    fs::write(&bad, serde_json::to_string(&edited).unwrap()).unwrap();
    let out = run(&["verify", "--orbit-file", path(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("v_max_consistent"));
}

#[test]
fn constant_orbit_at_a0() {
    let out = run(&["orbit", "--a", "8"]);
    assert_eq!(code(&out), 0);
    let v = json(&stdout(&out));
    assert_eq!(v["kind"], "constant");
    assert_eq!(v["L"], 0.0);
    assert_eq!(v["v_max"], 8.0);
}

#[test]
fn homoclinic_report_and_radial_profile() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bubble.json");
    let out = run(&["homoclinic", "--out-json", path(&file)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&stdout(&out));
    assert!((report["v_max"].as_f64().unwrap() - 120f64.sqrt()).abs() <= 1e-4);
    assert!((report["decay_limit"].as_f64().unwrap() / (4.0 * 120f64.sqrt()) - 1.0).abs() <= 1e-3);
    assert_eq!(report["verify_passed"], true);

    let csv = dir.path().join("radial.csv");
    let out = run(&["radial", "--orbit-file", path(&file), "--points", "800", "--out-csv", path(&csv)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let res = json(&stdout(&out));
    assert!(res["residual"].as_f64().unwrap() <= 1e-5);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("r,u,residual\n"));
    assert_eq!(text.lines().count(), 801);
}

#[test]
fn output_is_deterministic() {
    for args in
        [vec!["constants"], vec!["sweep", "--a-min", "1", "--a-max", "7", "--steps", "4"], vec!["orbit", "--a", "6"]]
    {
        let (a, b) = (run(&args), run(&args));
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn reports_use_twelve_digits() {
    let out = run(&["constants"]);
    let v = json(&stdout(&out));
    let b = v["b_over_A"].as_f64().unwrap();
    assert_eq!(format!("{b}"), "9.85344459417");
}
