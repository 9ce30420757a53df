use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fj")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = fj(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn dims_table_lists_even_weights() {
    let v = ok_json(&["siegel", "dims", "--max-k", "12"]);
    let dims: Vec<u64> = v["dims"].as_array().unwrap().iter().map(|r| r["expected"].as_u64().unwrap()).collect();
    assert_eq!(dims, [1, 0, 1, 1, 1, 2, 3]);
}

#[test]
fn jacobi_basis_of_weight_four_index_one() {
    let v = ok_json(&["jacobi", "basis", "-k", "4", "-m", "1"]);
    assert_eq!(v["dimension"], 1);
    assert_eq!(v["basis"].as_array().unwrap().len(), 1);
}

#[test]
fn solved_space_passes_check_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    let out = fj(&["siegel", "solve", "-k", "4", "-M", "3", "-N", "5", "--stabilize", "false", "-o", p(&s)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let art: Value = serde_json::from_str(&fs::read_to_string(&s).unwrap()).unwrap();
    assert_eq!(art["dimension"], 1);
    assert_eq!(art["expected_dimension"], 1);

    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "siegel solve");
    assert_eq!(manifest["details"]["matrix"]["cols"].as_u64().map(|c| c > 0), Some(true));

    let check = ok_json(&["fj", "check", p(&s)]);
    assert_eq!(check["symmetric"], true);
    assert_eq!(check["series"][0]["valid"], true);

    let table = ok_json(&["siegel", "table", p(&s)]);
    assert!(!table["coeffs"].as_array().unwrap().is_empty());
}

#[test]
fn lattice_to_weil_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let gram = dir.path().join("a2.txt");
    fs::write(&gram, "# A2\n2 -1\n-1 2\n").unwrap();
    let d = dir.path().join("d.json");
    assert!(fj(&["lattice", "disc", p(&gram), "-o", p(&d)]).status.success());
    let disc: Value = serde_json::from_str(&fs::read_to_string(&d).unwrap()).unwrap();
    assert_eq!(disc["orders"], serde_json::json!([3]));

    let w = ok_json(&["weil", "genus1", p(&d)]);
    assert_eq!(w["s"].as_array().unwrap().len(), 3);
    assert_eq!(w["t"].as_array().unwrap().len(), 3);

    let out = fj(&["weil", "genus2", p(&d)]);
    assert!(out.status.success());
    let manifest: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(manifest["details"]["violations"], serde_json::json!([]));
}

#[test]
fn errors_are_structured() {
    let out = fj(&["jacobi", "basis", "-k", "5", "-m", "1"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "UnsupportedWeight");

    let out = fj(&["fj", "check", "/nonexistent/x.json"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "Io");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 0\n0 2\n").unwrap();
    let out = fj(&["lattice", "disc", p(&bad)]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "InvalidLattice");
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let args = ["jacobi", "basis", "-k", "10", "-m", "2", "-N", "5"];
    let a = fj(&args).stdout;
    let b = fj(&args).stdout;
    assert_eq!(a, b);

    // a series read back and re-emitted is byte-identical
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    assert!(fj(&["siegel", "solve", "-k", "6", "-M", "2", "-N", "4", "--stabilize", "false", "-o", p(&s)])
        .status
        .success());
    let art: Value = serde_json::from_str(&fs::read_to_string(&s).unwrap()).unwrap();
    let one = dir.path().join("one.json");
    fs::write(&one, serde_json::to_string(&art["basis"][0]).unwrap()).unwrap();
    let t1 = dir.path().join("t1.json");
    let t2 = dir.path().join("t2.json");
    assert!(fj(&["fj", "tensor", p(&one), p(&one), "-o", p(&t1)]).status.success());
    assert!(fj(&["fj", "tensor", p(&s), p(&s), "-o", p(&t2)]).status.success());
    assert_eq!(fs::read(&t1).unwrap(), fs::read(&t2).unwrap());
}
