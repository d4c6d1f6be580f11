//! The scenario files in the repository match the presets and run at reduced mesh sizes.

use beamcontact::benchmarks::shipped;
use beamcontact::scenario::Scenario;
use std::path::PathBuf;

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn load(name: &str) -> Scenario {
    let path = scenario_dir().join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Scenario::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn files_match_presets() {
    let mut files: Vec<String> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    files.sort();
    let mut names: Vec<String> = shipped().iter().map(|(n, _)| n.to_string()).collect();
    names.sort();
    assert_eq!(files, names);
    for (name, preset) in shipped() {
        assert_eq!(load(name), preset, "{name}.json is out of date; regenerate with `beamsim preset --export scenarios`");
        assert_eq!(preset.name, name);
    }
}

#[test]
fn json_round_trip_is_exact() {
    for (name, preset) in shipped() {
        assert_eq!(Scenario::from_json(&preset.to_json()).unwrap(), preset, "{name}");
    }
}

#[test]
fn shipped_scenarios_run_on_coarse_meshes() {
    for (name, _) in shipped() {
        if name == "rope_reduced" {
            // Covered by the acceptance suite.
            continue;
        }
        let mut sc = load(name);
        if sc.beams.iter().all(|b| b.elements >= 8) {
            sc.set_elements(8);
        }
        let out = sc.run(|_| {}).unwrap();
        assert!(out.report.converged, "{name}: {:?}", out.report.failure);
    }
}
