//! Runs every bundled example binary; `cargo test` builds them alongside the tests.

use std::path::PathBuf;
use std::process::Command;

fn example_dir() -> PathBuf {
    // target/<profile>/deps/<this test> -> target/<profile>/examples
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().join("examples")
}

fn run(name: &str, args: &[&str]) -> String {
    let path = example_dir().join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
    let out = Command::new(&path).args(args).output().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn km_estimators() {
    assert!(run("km_estimators", &[]).contains("KM mean = 0.948440"));
}

#[test]
fn influence_identity() {
    let out = run("influence_identity", &[]);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn el_interval() {
    assert!(run("el_interval", &[]).contains("experimental"));
}

#[test]
fn scaled_comparator() {
    assert!(run("scaled_comparator", &[]).contains("r_hat"));
}

#[test]
fn asymptotic_variance() {
    assert!(run("asymptotic_variance", &[]).contains("0.093349"));
}

#[test]
fn coverage_study() {
    assert_eq!(run("coverage_study", &["100"]).lines().count(), 6);
}

#[test]
fn censoring_calibration() {
    assert!(run("censoring_calibration", &[]).contains("P(censored) = 0.3846"));
}

#[test]
fn custom_functional() {
    assert!(run("custom_functional", &[]).contains("tanh location"));
}

#[test]
fn chi2_calibration() {
    assert!(run("chi2_calibration", &[]).contains("90% quantile"));
}

#[test]
fn reproduce_table() {
    assert_eq!(run("reproduce_table", &["3", "100"]).lines().count(), 17);
}

#[test]
fn diagnose_sample() {
    assert!(run("diagnose_sample", &[]).contains("jackknife variance"));
}
