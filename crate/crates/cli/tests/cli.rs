use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use caloron_core::gauge::GroupMap;
use caloron_core::linalg::C64;
use caloron_core::loopcore::{GroupSpec, SampledLoop};
use caloron_core::meshforms::Mesh;
use caloron_core::samples::{random_pair, rng, PairShape};
use serde_json::Value;

fn caloron(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caloron")).args(args).output().unwrap()
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn winding_of_stored_loop() {
    let dir = tempfile::tempdir().unwrap();
    let l = SampledLoop::group_from_fn(GroupSpec::unitary(1), 64, |t| vec![C64::from_polar(1.0, 3.0 * t)]).unwrap();
    let input = write_json(dir.path(), "loop.json", &l);
    let out = caloron(&["compute", "winding", "--input", &input]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["winding"]["value"], 3);
}

#[test]
fn odd_character_of_constant_map_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = Arc::new(Mesh::torus(&[8, 8]).unwrap());
    let g = GroupMap::identity(&mesh, GroupSpec::unitary(2));
    let input = write_json(dir.path(), "g.json", &g);
    let out_path = dir.path().join("ch.json");
    let out = caloron(&["compute", "odd-ch", "--input", &input, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    let parts = v["form"]["parts"].as_object().unwrap();
    assert!(!parts.is_empty());
    for part in parts.values() {
        for data in part["components"].as_object().unwrap().values() {
            assert!(data.as_array().unwrap().iter().all(|z| z[0] == 0.0 && z[1] == 0.0));
        }
    }
}

#[test]
fn tau_prefactor_is_an_exact_fraction() {
    let out = caloron(&["compute", "tau", "-k", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["prefactor"], "-1/6");
    assert!(String::from_utf8_lossy(&out.stderr).contains("\u{2212}1/6"));
}

#[test]
fn list_prints_registry() {
    let out = caloron(&["suite", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l == "loops"));
    assert!(text.contains("fiber.stokes"));
}

#[test]
fn small_scenario_passes_and_is_reproducible() {
    let run = || caloron(&["suite", "--scenario", "fiber", "--jobs", "1"]);
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout_json(&a).as_array().unwrap().iter().all(|r| r["pass"] == true));
    let csv = caloron(&["suite", "--scenario", "fiber", "--output", "csv"]);
    assert!(String::from_utf8_lossy(&csv.stdout).starts_with("check_id,"));
}

#[test]
fn failing_check_exits_one() {
    let out = caloron(&["suite", "--scenario", "loops", "--tol", "loops.log-derivative-skew=0"]);
    let report = stdout_json(&out);
    let skew = report.as_array().unwrap().iter().find(|r| r["check_id"] == "loops.log-derivative-skew").unwrap();
    let expected = if skew["residual"].as_f64().unwrap() > 0.0 { 1 } else { 0 };
    assert_eq!(out.status.code(), Some(expected));
}

#[test]
fn supplied_pair_is_used_and_corruption_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let base = Mesh::torus(&[16, 16]).unwrap();
    let p = random_pair(&mut rng(7), &base, PairShape { n_theta: 32, ..Default::default() }).unwrap();
    let good = write_json(dir.path(), "pair.json", &p);
    let out = caloron(&["suite", "--scenario", "caloron", "--pair", &good]);
    assert_eq!(out.status.code(), Some(0));

    // add a Hermitian part to one Higgs sample
    let mut v = serde_json::to_value(&p).unwrap();
    v["higgs"][0]["samples"][3][0][0] = Value::from(0.5);
    let bad = write_json(dir.path(), "bad.json", &v);
    let out = caloron(&["suite", "--pair", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let report = stdout_json(&out);
    assert_eq!(report[0]["check_id"], "input.validation");
    assert_eq!(report[0]["pass"], false);
}

#[test]
fn bad_configuration_exits_two() {
    assert_eq!(caloron(&["suite", "--scenario", "nope"]).status.code(), Some(2));
    assert_eq!(caloron(&["suite", "--grid", "12x16"]).status.code(), Some(2));
    assert_eq!(caloron(&["compute", "winding"]).status.code(), Some(2));
}

#[test]
fn coefficient_table() {
    let out = caloron(&["table", "--max-degree", "2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("transgression,2,,-1/6"));
}

#[test]
fn default_suite_passes() {
    let out = caloron(&["suite"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
