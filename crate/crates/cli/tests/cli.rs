//! End-to-end checks of the binary: exit codes, file outputs, determinism
//! and the self-verification loop.

use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nodim"));
    // Keep the ambient environment from skewing seeded runs.
    c.env_remove("NODIM_SEED");
    c
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

fn write_wedge(path: &Path) {
    // Three halfspaces x.u >= 0.5 with u at 0, 120 and 240 degrees; every
    // pair meets the unit ball (corners at distance exactly 1), so the k=2
    // search must produce a witness.
    let s3 = 3f64.sqrt() / 2.0;
    let doc = serde_json::json!({
        "space": {"p": 2.0, "dim": 2, "mode": "euclidean"},
        "k": 2,
        "sets": [
            {"type": "halfspace", "a": [-1.0, 0.0], "b": -0.5},
            {"type": "halfspace", "a": [0.5, -s3], "b": -0.5},
            {"type": "halfspace", "a": [0.5, s3], "b": -0.5},
        ],
    });
    fs::write(path, doc.to_string()).unwrap();
}

#[test]
fn modulus_grid_row_count_and_endpoints() {
    let (code, stdout, _) = run(bin().args([
        "modulus", "--p", "2", "--dim", "2", "--eps", "0:2:0.1",
    ]));
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 22, "header plus 21 grid rows");
    assert_eq!(lines[0], "eps,delta,zeta_minus,zeta_plus");
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 1.0, 1.0]);
    let last: Vec<f64> = lines[21].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 2.0);
    assert_eq!(last[1], 1.0, "delta(2) = 1 exactly in euclidean mode");
    assert!((last[3] - 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn modulus_rejects_non_convex_exponent() {
    let (code, _, stderr) = run(bin().args(["modulus", "--p", "1", "--dim", "2"]));
    assert_eq!(code, 2);
    assert!(stderr.contains("p = 1"));
}

#[test]
fn rk_matches_the_two_set_fixed_point() {
    let (code, stdout, _) = run(bin().args(["rk", "--p", "2", "--k-max", "2"]));
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "k,r_k,bound");
    assert_eq!(lines.len(), 3);
    let r1: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    let r2: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(r1, 1.0);
    assert!((r2 - 0.7861513777574233).abs() < 1e-12);
}

#[test]
fn rk_single_row_and_usage_errors() {
    let (code, stdout, _) = run(bin().args(["rk", "--p", "2", "--k-max", "1"]));
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 2);
    let (code, _, _) = run(bin().args(["rk", "--p", "2", "--k-max", "0"]));
    assert_eq!(code, 2);
    let (code, _, _) = run(bin().args(["rk", "--k-max", "3"]));
    assert_eq!(code, 2, "missing --p is a usage error");
}

#[test]
fn wedge_witness_distances_stay_under_r2() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("wedge.json");
    let out = dir.path().join("out.json");
    write_wedge(&inst);
    let (code, _, _) = run(bin().args([
        "helly",
        inst.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["result"]["outcome"], "witness");
    assert_eq!(doc["verified"], true);
    let dists: Vec<f64> = serde_json::from_value(doc["result"]["per_set_dist"].clone()).unwrap();
    assert_eq!(dists.len(), 3);
    for d in dists {
        assert!(d <= 0.786151 + 1e-5, "distance {d} above r_2");
    }
}

#[test]
fn disjoint_pair_certificate_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("disjoint.json");
    let out = dir.path().join("out.json");
    let doc = serde_json::json!({
        "space": {"p": 2.0, "dim": 2, "mode": "euclidean"},
        "k": 2,
        "sets": [
            {"type": "halfspace", "a": [-1.0, 0.0], "b": -2.0},
            {"type": "halfspace", "a": [1.0, 0.0], "b": -2.0},
        ],
    });
    fs::write(&inst, doc.to_string()).unwrap();
    let (code, _, _) = run(bin().args([
        "helly",
        inst.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 1, "verified certificate is the meaningful negative");
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["result"]["outcome"], "certificate");
    assert_eq!(doc["result"]["dist_lower_bound"], Value::Null);
    assert_eq!(doc["verified"], true);
    // The stored certificate re-verifies and keeps its exit code.
    let (code, _, _) = run(bin().args(["helly", "--verify-only", out.to_str().unwrap()]));
    assert_eq!(code, 1);
}

#[test]
fn origin_in_every_set_gives_the_zero_witness() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("origin.json");
    let doc = serde_json::json!({
        "space": {"p": 2.0, "dim": 3, "mode": "euclidean"},
        "k": 2,
        "sets": [
            {"type": "halfspace", "a": [1.0, 0.0, 0.0], "b": 0.0},
            {"type": "halfspace", "a": [0.0, -1.0, 0.0], "b": 0.0},
            {"type": "ball", "center": [0.0, 0.0, 0.0], "radius": 0.5},
        ],
    });
    fs::write(&inst, doc.to_string()).unwrap();
    let (code, stdout, _) = run(bin().args(["helly", inst.to_str().unwrap()]));
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&stdout).unwrap();
    let x: Vec<f64> = serde_json::from_value(doc["result"]["x"].clone()).unwrap();
    assert!(x.iter().all(|&c| c.abs() < 1e-9), "witness stays at the origin");
}

#[test]
fn identical_config_and_seed_reproduce_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("wedge.json");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    write_wedge(&inst);
    for out in [&a, &b] {
        let (code, _, _) = run(bin().args([
            "helly",
            inst.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]));
        assert_eq!(code, 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn env_seed_wins_over_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("wedge.json");
    write_wedge(&inst);
    let (code, stdout, _) = run(bin()
        .env("NODIM_SEED", "7")
        .args(["helly", inst.to_str().unwrap(), "--seed", "123"]));
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["seed"], 7);
    let (code, _, _) = run(bin()
        .env("NODIM_SEED", "not-a-number")
        .args(["helly", inst.to_str().unwrap()]));
    assert_eq!(code, 2);
}

#[test]
fn tampered_outcome_flag_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("wedge.json");
    let out = dir.path().join("out.json");
    write_wedge(&inst);
    run(bin().args([
        "helly",
        inst.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    let (code, _, _) = run(bin().args(["helly", "--verify-only", out.to_str().unwrap()]));
    assert_eq!(code, 0);
    let flipped = fs::read_to_string(&out)
        .unwrap()
        .replace("\"verified\": true", "\"verified\": false");
    fs::write(&out, flipped).unwrap();
    let (code, _, stderr) = run(bin().args(["helly", "--verify-only", out.to_str().unwrap()]));
    assert_eq!(code, 3);
    assert!(stderr.contains("does not match recomputed"));
}

#[test]
fn schema_violations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("bad.json");
    fs::write(
        &inst,
        r#"{"space": {"p": 2.0, "dim": 2, "mode": "euclidean"}, "k": 2, "sets": [], "extra": 1}"#,
    )
    .unwrap();
    let (code, _, stderr) = run(bin().args(["helly", inst.to_str().unwrap()]));
    assert_eq!(code, 2);
    assert!(stderr.contains("extra"), "error names the offending field: {stderr}");
    let (code, _, _) = run(bin().args(["helly", dir.path().join("missing.json").to_str().unwrap()]));
    assert_eq!(code, 2);
}

#[test]
fn caratheodory_run_writes_curve_and_reverifies() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("cara.json");
    let out = dir.path().join("out.json");
    let curve = dir.path().join("curve.csv");
    let doc = serde_json::json!({
        "space": {"p": 3.0, "dim": 2, "mode": "lp"},
        "steps": 6,
        "points": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
    });
    fs::write(&inst, doc.to_string()).unwrap();
    let (code, _, _) = run(bin().args([
        "caratheodory",
        inst.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--curve",
        curve.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let curve_text = fs::read_to_string(&curve).unwrap();
    assert!(curve_text.starts_with("k,a_k_over_k,R_k_over_k\n"));
    assert_eq!(curve_text.lines().count(), 7);
    // The outcome file re-runs deterministically, estimation included.
    let (code, _, _) = run(bin().args(["caratheodory", "--verify-only", out.to_str().unwrap()]));
    assert_eq!(code, 0);
}

#[test]
fn centerpoint_cross_instance_passes_and_reverifies() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("cp.json");
    let out = dir.path().join("out.json");
    let doc = serde_json::json!({
        "space": {"p": 2.0, "dim": 2, "mode": "euclidean"},
        "k": 2,
        "points": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
    });
    fs::write(&inst, doc.to_string()).unwrap();
    let (code, stdout, _) = run(bin().args([
        "centerpoint",
        inst.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0, "stdout: {stdout}");
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["result"]["min_halfspace_count"].as_u64().unwrap() >= 2);
    let (code, _, _) = run(bin().args(["centerpoint", "--verify-only", out.to_str().unwrap()]));
    assert_eq!(code, 0);
}

#[test]
fn fractional_run_clears_its_measured_target() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("frac.json");
    let out = dir.path().join("out.json");
    let mut sets = vec![serde_json::json!({"type": "halfspace", "a": [-1.0, 0.0], "b": -2.0})];
    for _ in 0..9 {
        sets.push(serde_json::json!({"type": "halfspace", "a": [1.0, 0.0], "b": 0.0}));
    }
    let doc = serde_json::json!({
        "space": {"p": 2.0, "dim": 2, "mode": "euclidean"},
        "k": 2,
        "sets": sets,
    });
    fs::write(&inst, doc.to_string()).unwrap();
    let (code, _, _) = run(bin().args([
        "fractional",
        inst.to_str().unwrap(),
        "--alpha",
        "0.8",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let report = &doc["report"];
    assert_eq!(report["alpha_empirical"].as_f64().unwrap(), 0.8);
    assert!(report["covered_fraction"].as_f64().unwrap() >= 0.9 - 1e-12);
    assert_eq!(doc["verified"], true);
    let (code, _, _) = run(bin().args(["fractional", "--verify-only", out.to_str().unwrap()]));
    assert_eq!(code, 0);
}
