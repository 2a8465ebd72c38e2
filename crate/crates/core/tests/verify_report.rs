use thetanull::verify::{check_names, run_verify, Status, VerifyConfig, VerifyReport};

fn without_timings(mut report: VerifyReport) -> String {
    for c in &mut report.checks {
        c.elapsed_secs = 0.0;
    }
    serde_json::to_string(&report).unwrap()
}

#[test]
fn identical_configs_give_identical_reports() {
    let cfg = VerifyConfig {
        checks: vec!["incidence".into(), "thetanum.heat".into(), "siegel".into()],
        ..VerifyConfig::default()
    };
    let a = without_timings(run_verify(&cfg).unwrap());
    let b = without_timings(run_verify(&cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn other_seed_still_passes() {
    let cfg = VerifyConfig {
        seed: 7,
        checks: vec!["incidence".into(), "thetanum.order".into(), "thetanum.block_factorization".into()],
        ..VerifyConfig::default()
    };
    let report = run_verify(&cfg).unwrap();
    assert_eq!(report.status, Status::Pass, "{report:#?}");
}

#[test]
fn unreachable_tolerance_fails_numeric_checks() {
    let cfg = VerifyConfig {
        tol: 1e-30,
        checks: vec!["thetanum".into(), "charalg".into()],
        ..VerifyConfig::default()
    };
    let report = run_verify(&cfg).unwrap();
    assert_eq!(report.status, Status::Fail);
    for c in &report.checks {
        if c.name.starts_with("thetanum") {
            assert_eq!(c.status, Status::Fail, "{}", c.name);
            assert!(c.diagnostic.as_deref().unwrap_or("").contains("truncation"), "{}", c.name);
        } else {
            assert_eq!(c.status, Status::Pass);
        }
    }
}

#[test]
fn report_lists_every_tolerance_and_seed() {
    let report = run_verify(&VerifyConfig {
        checks: vec!["thetanum.heat".into(), "incidence.red".into()],
        ..VerifyConfig::default()
    })
    .unwrap();
    for c in &report.checks {
        assert!(!c.tolerances.is_empty(), "{}", c.name);
        assert!(!c.anchor.is_empty());
        assert_ne!(c.seed, 0);
    }
    assert!(report.note.contains("not reproducible"));
}

#[test]
fn full_run_fails_only_on_the_literal_shift_relation() {
    let report = run_verify(&VerifyConfig::default()).unwrap();
    assert_eq!(report.checks.len(), check_names().len());
    let failing: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| c.status != Status::Pass)
        .map(|c| c.name.as_str())
        .collect();
    assert_eq!(failing, ["thetanum.shift"]);
    assert_eq!(report.status, Status::Fail);
}
