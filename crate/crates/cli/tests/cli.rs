use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use multient::io::{read_state, write_state};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multient")).args(args).output().expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json stdout")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn measure_ghz() {
    let ghz = fixture("ghz.json");
    let v = json_of(&["--json", "measure", "--in", path_str(&ghz), "--method", "m1"]);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 5e-4);
    assert_eq!(v["method"], "M1");
    assert_eq!(v["schmidtTermCount"], 2);
    let human = run(&["measure", "--in", path_str(&ghz)]);
    assert!(String::from_utf8_lossy(&human.stdout).starts_with("M1 = 1"));
}

#[test]
fn measure_variants_on_the_separable_mixture() {
    let sep = fixture("separable_mixed.json");
    let avg = json_of(&["--json", "measure", "--in", path_str(&sep), "--method", "m2"]);
    assert!(avg["value"].as_f64().unwrap() < 1e-4);
    assert_eq!(avg["method"], "M2-average");
    let joint = json_of(&["--json", "measure", "--in", path_str(&sep), "--method", "m2", "--variant", "joint"]);
    assert_eq!(joint["method"], "M2-joint");
    assert!((joint["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let conflict = run(&["measure", "--in", path_str(&sep), "--method", "m2joint", "--variant", "average"]);
    assert_eq!(conflict.status.code(), Some(2));
}

#[test]
fn classify_w() {
    let v = json_of(&["--json", "classify", "--in", path_str(&fixture("w.json"))]);
    assert_eq!(v["systemId"], 8);
    assert_eq!(v["classMembers"], serde_json::json!([8]));
    assert_eq!(v["exact"], true);
}

#[test]
fn classify_a_density_is_heuristic() {
    let v = json_of(&["--json", "classify", "--in", path_str(&fixture("ghz_density.json"))]);
    assert_eq!(v["exact"], false);
    assert!(v["systemId"].is_u64());
}

#[test]
fn enumerate_three_and_five() {
    let v = json_of(&["--json", "enumerate", "--parties", "3"]);
    assert_eq!(v["structureCount"], 16);
    assert_eq!(v["classCount"], 8);
    assert_eq!(v["structures"].as_array().unwrap().len(), 16);
    let five = json_of(&["--json", "enumerate", "--parties", "5"]);
    assert_eq!(five["listed"], false);
    assert_eq!(five["structureCount"], 67108864u64);
}

#[test]
fn gsd_and_purify_write_readable_states() {
    let dir = tempfile::tempdir().unwrap();
    let form_out = dir.path().join("form.json");
    let v = json_of(&["--json", "gsd", "--in", path_str(&fixture("w.json")), "--out", path_str(&form_out)]);
    assert_eq!(v["termCount"], 3);
    assert!(read_state(&form_out).unwrap().validate().is_valid());

    let purified = dir.path().join("purified.json");
    let p = json_of(&["--json", "purify", "--in", path_str(&fixture("separable_mixed.json")), "--out", path_str(&purified)]);
    assert_eq!(p["rank"], 2);
    let state = read_state(&purified).unwrap();
    assert!(matches!(state, multient::State::Pure(_)));

    let stdout = run(&["purify", "--in", path_str(&fixture("bell.json"))]);
    assert!(multient::io::state_from_json(&String::from_utf8_lossy(&stdout.stdout)).is_ok());
}

#[test]
fn random_is_seeded() {
    let a = run(&["random", "--dims", "2,3", "--rank", "2", "--seed", "4"]);
    let b = run(&["random", "--dims", "2,3", "--rank", "2", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    let state = multient::io::state_from_json(&String::from_utf8_lossy(&a.stdout)).unwrap();
    assert!(matches!(state, multient::State::Density(_)));
    let c = run(&["random", "--dims", "2,3", "--rank", "2", "--seed", "5"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn check_additivity_reports_pass() {
    let v = json_of(&["--json", "check", "--suite", "additivity"]);
    assert_eq!(v["additivity"]["passed"], true);
    assert_eq!(v["additivity"]["cases"].as_array().unwrap().len(), 10);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // usage
    assert_eq!(run(&["gsd", "--in", path_str(&fixture("ghz_density.json"))]).status.code(), Some(2));
    assert_eq!(run(&["measure", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--parties", "1"]).status.code(), Some(2));
    // missing file
    let missing = dir.path().join("missing.json");
    let out = run(&["--json", "measure", "--in", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], 1);
    assert!(err["error"]["message"].as_str().unwrap().contains("missing.json"));
    // malformed and invalid input
    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(run(&["measure", "--in", path_str(&garbage)]).status.code(), Some(3));
    let unnormalized = dir.path().join("unnormalized.json");
    fs::write(&unnormalized, r#"{"kind":"pure","dims":[2],"data":[[1.0,0.0],[1.0,0.0]]}"#).unwrap();
    assert_eq!(run(&["measure", "--in", path_str(&unnormalized)]).status.code(), Some(3));
    // size cap
    let out = run(&["measure", "--in", path_str(&fixture("ghz_w_mixture.json")), "--size-cap", "8"]);
    assert_eq!(out.status.code(), Some(5));
    // strict passes on a converged run
    assert_eq!(run(&["measure", "--in", path_str(&fixture("ghz.json")), "--strict"]).status.code(), Some(0));
}

#[test]
fn fixtures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in fs::read_dir(fixture("")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let state = read_state(&path).unwrap();
        assert!(state.validate().is_valid(), "{}", path.display());
        let copy = dir.path().join(path.file_name().unwrap());
        write_state(&state, &copy).unwrap();
        assert_eq!(read_state(&copy).unwrap(), state, "{}", path.display());
        seen += 1;
    }
    assert_eq!(seen, 9);
}
