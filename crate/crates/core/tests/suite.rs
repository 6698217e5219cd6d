use caloron_core::suite::{registry, run_suite, scenarios, Report, ScenarioConfig, TolOverrides};

fn small(scenario: &str) -> ScenarioConfig {
    ScenarioConfig { scenario: Some(scenario.into()), jobs: 1, ..Default::default() }
}

#[test]
fn fast_scenarios_pass() {
    for s in ["loops", "coefficients", "character", "fiber"] {
        let report = run_suite(&small(s)).unwrap();
        assert!(!report.records.is_empty());
        for r in report.failures() {
            panic!("{} failed: residual {:?}, tolerance {}, error {:?}", r.check_id, r.residual, r.tolerance, r.error);
        }
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = run_suite(&small("fiber")).unwrap().to_json().unwrap();
    let b = run_suite(&ScenarioConfig { jobs: 2, ..small("fiber") }).unwrap().to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn records_are_sorted_and_carry_the_schema() {
    let report = run_suite(&small("loops")).unwrap();
    let ids: Vec<_> = report.records.iter().map(|r| r.check_id.clone()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    let v: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    for key in ["check_id", "paper_ref", "residual", "tolerance", "pass", "wall_ms"] {
        assert!(v[0].get(key).is_some(), "missing {key}");
    }
    let csv = report.to_csv().unwrap();
    assert!(csv.starts_with("check_id,paper_ref,residual,tolerance,pass,wall_ms,error\n"));
    assert_eq!(csv.lines().count(), report.records.len() + 1);
}

#[test]
fn zero_tolerance_override_fails_an_inexact_check() {
    let tolerance = TolOverrides::parse(&["loops.log-derivative-skew=0".into()]).unwrap();
    let report = run_suite(&ScenarioConfig { tolerance, ..small("loops") }).unwrap();
    let failed: Vec<_> = report.failures().map(|r| r.check_id.as_str()).collect();
    let skew = report.records.iter().find(|r| r.check_id == "loops.log-derivative-skew").unwrap();
    if skew.residual.unwrap() > 0.0 {
        assert_eq!(failed, ["loops.log-derivative-skew"]);
    } else {
        assert!(failed.is_empty());
    }
}

#[test]
fn bad_configs_are_rejected() {
    assert!(run_suite(&small("no-such-scenario")).is_err());
    assert!(run_suite(&ScenarioConfig { rank: 9, ..small("loops") }).is_err());
    let tolerance = TolOverrides::parse(&["no.such.check=1".into()]).unwrap();
    assert!(run_suite(&ScenarioConfig { tolerance, ..small("loops") }).is_err());
}

#[test]
fn every_check_belongs_to_a_listed_scenario() {
    let listed = scenarios();
    assert!(registry().iter().all(|c| listed.contains(&c.scenario) && c.id.starts_with(c.scenario)));
}

#[test]
fn validation_failure_report_fails() {
    let r = Report::validation_failure("Phi is not skew");
    assert!(!r.passed());
    assert!(r.to_json().unwrap().contains("Phi is not skew"));
}
