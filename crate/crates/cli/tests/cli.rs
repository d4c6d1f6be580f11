//! End-to-end tests of the `beamsim` binary.

use beamcontact::scenario::{RunReport, Scenario};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn beamsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamsim")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"))
}

fn text(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn run_writes_summary_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("endpoint_junction");
    let out = beamsim(&["--threads", "1", "run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let written: RunReport = serde_json::from_str(&text(&dir.path().join("summary.json"))).unwrap();
    let direct = Scenario::from_json(&text(&path)).unwrap().run(|_| {}).unwrap().report;
    assert_eq!(written, direct);

    let steps = text(&dir.path().join("steps.csv"));
    assert!(steps.starts_with("step,iterations,halvings,residual,"));
    assert_eq!(steps.lines().count(), 1 + direct.steps.len());
    let points = text(&dir.path().join("points.csv"));
    assert!(points.starts_with("step,kind,beam_a,beam_b,s_a,s_b,gap,force,alpha\n"));
    assert!(points.contains(",endpoint_line,"));
}

#[test]
fn line_contact_distribution_per_beam_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("twisting_separated_smoothed");
    let out = beamsim(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--elements", "8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = text(&dir.path().join("distribution_b0_b1.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,s,gap,force,alpha"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last.len(), 5);
    assert_eq!(last[0], 8.0);
}

#[test]
fn helix_run_reports_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(&["run", scenario("twisting_helix").to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--elements", "8"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("helix L2 error"));
}

#[test]
fn malformed_scenario_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let mut sc: serde_json::Value = serde_json::from_str(&text(&scenario("patch_test"))).unwrap();
    sc["contact"]["law"]["epsilon"] = serde_json::json!("stiff");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, sc.to_string()).unwrap();
    let out = beamsim(&["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("contact.law"), "{err}");
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn failed_run_exits_nonzero_and_keeps_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut sc = Scenario::from_json(&text(&scenario("twisting_helix"))).unwrap();
    sc.solver.max_iterations = 1;
    sc.solver.max_halvings = 0;
    let path = dir.path().join("strict.json");
    std::fs::write(&path, sc.to_json()).unwrap();
    let out = beamsim(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--elements", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let report: RunReport = serde_json::from_str(&text(&dir.path().join("summary.json"))).unwrap();
    assert!(!report.converged);
    assert!(report.failure.is_some());
}

#[test]
fn convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(&[
        "convergence",
        scenario("twisting_helix").to_str().unwrap(),
        "--elements",
        "4,8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = text(&dir.path().join("convergence.csv"));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "elements,error,order");
    assert!(rows[1].starts_with("4,") && rows[1].ends_with(','));
    let order: f64 = rows[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!(order > 2.0, "{order}");
    let json: serde_json::Value = serde_json::from_str(&text(&dir.path().join("convergence.json"))).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn projection_check_passes_and_is_seeded() {
    let run = |seed: &str| beamsim(&["check", "--projections", "--trials", "50", "--seed", seed]);
    let (a, b) = (run("3"), run("3"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let reports: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 1);
    assert_eq!(reports[0]["trials"], 50);
    assert_eq!(reports[0]["failures"], 0);
}

#[test]
fn presets_export_matches_repository() {
    let dir = tempfile::tempdir().unwrap();
    assert!(beamsim(&["preset", "--export", dir.path().to_str().unwrap()]).status.success());
    for e in std::fs::read_dir(dir.path()).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_stem().unwrap().to_str().unwrap().to_owned();
        assert_eq!(text(&p), text(&scenario(&name)), "{name}");
    }
    assert_eq!(beamsim(&["preset", "no_such_thing"]).status.code(), Some(2));
}
