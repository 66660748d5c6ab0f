//! End-to-end tests of the command-line surface and its file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_spikesolve")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spikesolve-test-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn moments_of_dirac_at_origin() {
    let dir = tmpdir("dirac");
    let measure = dir.join("mu.json");
    write(
        &measure,
        r#"{"n":1,"atoms":[{"point":[0.0],"weight":1.0}]}"#,
    );
    let out = run(&[
        "moments",
        "--measure",
        measure.to_str().unwrap(),
        "--degree",
        "2",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let values = v["values"].as_array().unwrap();
    assert_eq!(values[0].as_f64().unwrap(), 1.0);
    assert_eq!(values[1].as_f64().unwrap(), 0.0);
    assert_eq!(values[2].as_f64().unwrap(), 0.0);
}

#[test]
fn uniform_density_moments_are_lebesgue() {
    let out = run(&["moments", "--density", "uniform", "--degree", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let values = v["values"].as_array().unwrap();
    assert_eq!(values[0].as_f64().unwrap(), 2.0);
    assert_eq!(values[1].as_f64().unwrap(), 0.0);
    assert!((values[2].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn noisy_moments_are_seed_deterministic() {
    let a = run(&[
        "moments", "--density", "uniform", "--degree", "4", "--noise", "1e-3", "--seed", "123",
    ]);
    let b = run(&[
        "moments", "--density", "uniform", "--degree", "4", "--noise", "1e-3", "--seed", "123",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "moments", "--density", "uniform", "--degree", "4", "--noise", "1e-3", "--seed", "124",
    ]);
    assert_ne!(a.stdout, c.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn exact_round_trip_three_atoms() {
    let dir = tmpdir("roundtrip");
    let measure = dir.join("mu.json");
    write(
        &measure,
        r#"{"n":1,"atoms":[{"point":[-0.62],"weight":0.5},{"point":[0.11],"weight":0.3},{"point":[0.74],"weight":0.2}]}"#,
    );
    let moments = dir.join("y.json");
    let out = run(&[
        "moments",
        "--measure",
        measure.to_str().unwrap(),
        "--degree",
        "12",
        "--out",
        moments.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recovered = dir.join("rec.json");
    let report = dir.join("report.json");
    let out = run(&[
        "recover",
        "--moments",
        moments.to_str().unwrap(),
        "--mode",
        "exact",
        "--degree",
        "6",
        "--out",
        recovered.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&recovered).unwrap()).unwrap();
    let atoms = rec["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 3);
    let mut got: Vec<(f64, f64)> = atoms
        .iter()
        .map(|a| {
            (
                a["point"][0].as_f64().unwrap(),
                a["weight"].as_f64().unwrap(),
            )
        })
        .collect();
    got.sort_by(|x, y| x.0.total_cmp(&y.0));
    let want = [(-0.62, 0.5), (0.11, 0.3), (0.74, 0.2)];
    for ((gp, gw), (wp, ww)) in got.iter().zip(want.iter()) {
        assert!((gp - wp).abs() < 1e-3, "position {gp} vs {wp}");
        assert!((gw - ww).abs() < 1e-3, "weight {gw} vs {ww}");
    }
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["success"].as_bool(), Some(true));
    assert!(rep["hstar"].as_array().unwrap().len() > 0);
}

#[test]
fn noisy_recover_reports_level_and_alpha() {
    let dir = tmpdir("noisy");
    let measure = dir.join("mu.json");
    write(
        &measure,
        r#"{"n":1,"atoms":[{"point":[-0.4],"weight":0.6},{"point":[0.5],"weight":0.4}]}"#,
    );
    let moments = dir.join("y.json");
    assert!(run(&[
        "moments",
        "--measure",
        measure.to_str().unwrap(),
        "--degree",
        "6",
        "--basis",
        "orthonormal",
        "--noise",
        "1e-5",
        "--seed",
        "42",
        "--out",
        moments.to_str().unwrap(),
    ])
    .status
    .success());
    let report = dir.join("report.json");
    let out = run(&[
        "recover",
        "--moments",
        moments.to_str().unwrap(),
        "--mode",
        "noisy",
        "--degree",
        "3",
        "--truth",
        measure.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["level"].as_u64(), Some(6));
    assert!(rep["alpha"].as_f64().is_some());
    // truth given: the five quantitative diagnostics are present
    let diag = &rep["diagnostics"];
    assert!(diag["near_energy"]["bound"].as_f64().is_some());
    assert!(diag["far_bound"]["bound"].as_f64().is_some());
    assert!(diag["negative_bound"]["bound"].as_f64().is_some());
    assert!(diag["weight_bound"]["bound"].as_f64().is_some());
    assert!(diag["key_bound"]["bound"].as_f64().is_some());
}

#[test]
fn analyze_four_interval_points() {
    let dir = tmpdir("analyze");
    let pts = dir.join("pts.json");
    write(
        &pts,
        r#"{"n":1,"atoms":[{"point":[-0.7],"weight":1.0},{"point":[-0.2],"weight":1.0},{"point":[0.3],"weight":1.0},{"point":[0.8],"weight":1.0}]}"#,
    );
    let out = run(&["analyze", "--points", pts.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["safe_degree"].as_u64(), Some(8));
    assert_eq!(v["singular_degree"].as_u64(), Some(8));
    assert_eq!(v["interpolation_degree"].as_u64(), Some(3));
    assert_eq!(v["generic_upper"].as_u64(), Some(8));
    assert_eq!(v["generic_lower"].as_u64(), Some(7));
}

#[test]
fn analyze_single_point() {
    let dir = tmpdir("single");
    let pts = dir.join("pts.json");
    write(&pts, r#"{"n":2,"atoms":[{"point":[0.1,0.2],"weight":1.0}]}"#);
    let out = run(&["analyze", "--points", pts.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["interpolation_degree"].as_u64(), Some(0));
    assert_eq!(v["singular_degree"].as_u64(), Some(2));
}

#[test]
fn duplicate_points_exit_code_four() {
    let dir = tmpdir("dup");
    let pts = dir.join("pts.json");
    write(
        &pts,
        r#"{"n":1,"atoms":[{"point":[0.5],"weight":1.0},{"point":[0.5],"weight":1.0}]}"#,
    );
    let out = run(&["analyze", "--points", pts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn schema_violation_is_nonzero_exit_with_message() {
    let dir = tmpdir("schema");
    let bad = dir.join("bad.json");
    write(&bad, r#"{"n":1,"degree":3,"basis":"monomial","box":[[-1.0,1.0]],"values":[1.0],"delta":0.0}"#);
    let out = run(&["recover", "--moments", bad.to_str().unwrap(), "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn summarize_uniform_degree_two() {
    let out = run(&["summarize", "--density", "uniform", "--degree", "2", "--k", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut nodes: Vec<f64> = v["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["point"][0].as_f64().unwrap())
        .collect();
    nodes.sort_by(f64::total_cmp);
    let gl = 1.0 / 3f64.sqrt();
    assert!((nodes[0] + gl).abs() < 1e-2);
    assert!((nodes[1] - gl).abs() < 1e-2);
}

#[test]
fn certify_emits_constants() {
    let dir = tmpdir("certify");
    let pts = dir.join("pts.json");
    write(
        &pts,
        r#"{"n":1,"atoms":[{"point":[-0.5],"weight":1.0},{"point":[0.5],"weight":1.0}]}"#,
    );
    let out = run(&["certify", "--points", pts.to_str().unwrap(), "--m", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["c_b"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(v["s"].as_u64(), Some(1));
    assert_eq!(v["sup_norm_ok"].as_bool(), Some(true));
}

#[test]
fn experiment_heatmap_is_byte_reproducible() {
    let dir1 = tmpdir("exp1");
    let dir2 = tmpdir("exp2");
    for dir in [&dir1, &dir2] {
        let out = run(&[
            "experiment",
            "--kind",
            "exact-heatmap",
            "--n",
            "1",
            "--k",
            "1..2",
            "--d",
            "2..3",
            "--trials",
            "2",
            "--seed",
            "7",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["exact_heatmap.csv", "exact_heatmap.jsonl"] {
        let a = std::fs::read(dir1.join(name)).unwrap();
        let b = std::fs::read(dir2.join(name)).unwrap();
        assert_eq!(a, b, "{name} must be byte-identical across runs");
    }
}
