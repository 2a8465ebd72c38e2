#![allow(clippy::excessive_precision)]

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetanull"))
        .args(args)
        .env_remove("THETANULL_VERIFY_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> Vec<f64> {
    let line = text.lines().find(|l| l.split_whitespace().next() == Some(key)).unwrap();
    line.split_whitespace().skip(1).map(|x| x.parse().unwrap()).collect()
}

#[test]
fn theta_eval_prints_seventeen_digits() {
    let o = run(&["theta", "eval", "--delta", "[0|0]", "--omega", &fixture("omega_i.json")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("value      1.0864348112133080e0 "), "{out}");
    assert!(field(&out, "tail_bound")[0] <= 1e-10);
    assert!(field(&out, "radius")[0] > 0.0);
}

#[test]
fn theta_eval_with_z() {
    let o = run(&[
        "theta",
        "eval",
        "--delta",
        "g=3:[110|100]",
        "--omega",
        &fixture("omega_g3.json"),
        "--z",
        &fixture("z_g3.json"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = field(&stdout(&o), "value");
    assert!((v[0] + 0.31115446027963220725).abs() < 1e-10);
    assert!((v[1] - 0.013508808085566962657).abs() < 1e-10);
}

#[test]
fn theta_jet_heat_and_order() {
    let omega = fixture("omega_g3.json");
    let o = run(&["theta", "jet", "--delta", "[111|111]", "--omega", &omega]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("hessian[1,3]"));

    let o = run(&["theta", "heat", "--delta", "[000|100]", "--omega", &omega, "--j", "1", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(field(&stdout(&o), "relative")[0] < 1e-4);

    // odd characteristic: value vanishes, gradient does not
    let o = run(&["theta", "order", "--delta", "[100|100]", "--omega", &omega]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("order 1"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["theta", "eval", "--delta", "[12|00]", "--omega", &fixture("omega_i.json")]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["theta", "eval", "--delta", "[00|00]", "--omega", &fixture("omega_not_pd.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`im`"));
    let o = run(&["theta", "heat", "--delta", "[0|0]", "--omega", &fixture("omega_i.json"), "--j", "0", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["census", "components"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_exits_one() {
    let o = run(&["theta", "eval", "--delta", "[0|0]", "--omega", &fixture("omega_i.json"), "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncation"));
}

#[test]
fn incidence_report_counts() {
    for (kind, expected) in [("red", 6), ("red_sing", 9)] {
        let o = run(&["incidence", "report", "--kind", kind, "--seed", "3"]);
        assert_eq!(o.status.code(), Some(0), "{kind}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["vanishing_even"].as_array().unwrap().len(), expected, "{kind}");
    }
    let o = run(&["incidence", "report", "--kind", "red", "--grouping", "[[1],[2],[3]]"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn indeterminate_margins_exit_three() {
    // vanishing thetanulls sit near 1e-16, inside the window below 1e-4
    let o = run(&["incidence", "report", "--kind", "red", "--tol-zero", "1e-20"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn incidence_census() {
    let o = run(&["incidence", "census"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["incidences_with_multiplicity"], 18);
    assert_eq!(v["distinct_hyp"], 9);
}

#[test]
fn census_commands() {
    let o = run(&["census", "components", "--genus", "3"]);
    assert_eq!(stdout(&o).trim(), "36");
    let o = run(&["census", "components", "--genus", "4"]);
    assert_eq!(stdout(&o).trim(), "13056");
    let o = run(&["census", "betti", "--genus", "2", "--polynomial"]);
    assert_eq!(stdout(&o), "9\n1 9 26 24\n");

    let o = run(&["census", "nerve", "--config", &fixture("nerve_boundary.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["support"]["degrees"], serde_json::json!([7, 8]));
    assert_eq!(v["support"]["degeneration"], "automatic");

    let o = run(&["census", "gysin"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[3]["status"], "free");
    assert_eq!(v[5]["status"], "zero");
    assert_eq!(v[2]["status"], "unconstrained");
}

#[test]
fn verify_subset_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = run(&["verify", "--checks", "charalg", "--json", path.to_str().unwrap(), "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["status"], "pass");
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["charalg.census"]);
}

#[test]
fn verify_tight_tolerance_fails() {
    let o = run(&["verify", "--checks", "thetanum.odd_vanish", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_config_file_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"seed": 5, "checks": ["census"]}"#).unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"seed": "five"}"#).unwrap();

    let o = run(&["verify", "--config", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["seed"], 5);

    let o = run(&["verify", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_thetanull"))
        .args(["verify", "--config", bad.to_str().unwrap()])
        .env("THETANULL_VERIFY_CONFIG", &good)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_unknown_check_is_usage_error() {
    let o = run(&["verify", "--checks", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}
