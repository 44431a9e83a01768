use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepcrit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn norm_of(report: &Value, name: &str) -> f64 {
    report["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no criterion {name}"))["norm"]
        .as_f64()
        .unwrap()
}

fn write_operator(
    dir: &Path,
    name: &str,
    kind: &str,
    dims: &[usize],
    diag_re: &[f64],
    extra: &[(usize, usize, f64)],
) -> PathBuf {
    let d = diag_re.len();
    let mut m = vec![vec![[0.0, 0.0]; d]; d];
    for (i, &x) in diag_re.iter().enumerate() {
        m[i][i] = [x, 0.0];
    }
    for &(r, c, x) in extra {
        m[r][c] = [x, 0.0];
    }
    let path = dir.join(name);
    std::fs::write(
        &path,
        json!({ "kind": kind, "dims": dims, "matrix": m }).to_string(),
    )
    .unwrap();
    path
}

/// `I/2 − P_+` on two qubits.
fn reduction_witness(dir: &Path) -> PathBuf {
    write_operator(
        dir,
        "w.json",
        "witness",
        &[2, 2],
        &[0.0, 0.5, 0.5, 0.0],
        &[(0, 3, -0.5), (3, 0, -0.5)],
    )
}

#[test]
fn analyze_upb_realignment() {
    let r = stdout_json(&run(&[
        "analyze",
        "--builtin",
        "upb3",
        "--criteria",
        "realign",
    ]));
    assert!((norm_of(&r, "realign@{2,3}") - 1.08649).abs() < 5e-4);
    assert_eq!(r["verdict"], "entangled");
    assert_eq!(r["dims"], json!([2, 2, 2]));
}

#[test]
fn analyze_maxent_ppt() {
    let r = stdout_json(&run(&[
        "analyze",
        "--builtin",
        "maxent:2",
        "--criteria",
        "ppt",
    ]));
    assert!((norm_of(&r, "PPT@{2}") - 2.0).abs() < 1e-9);
    assert_eq!(r["verdict"], "entangled");
}

#[test]
fn analyze_product_is_undetected() {
    let r = stdout_json(&run(&[
        "analyze",
        "--builtin",
        "product:2,2",
        "--criteria",
        "all",
        "--seed",
        "5",
    ]));
    assert_eq!(r["verdict"], "undetected");
    for c in r["criteria"].as_array().unwrap() {
        assert!((c["norm"].as_f64().unwrap() - 1.0).abs() < 1e-9, "{c}");
    }
    assert_eq!(r["criteria"].as_array().unwrap().len(), 1 + 1 + 24);
}

#[test]
fn analyze_state_file_and_table() {
    let dir = TempDir::new().unwrap();
    let path = write_operator(
        dir.path(),
        "s.json",
        "state",
        &[2, 2],
        &[0.5, 0.0, 0.0, 0.5],
        &[(0, 3, 0.5), (3, 0, 0.5)],
    );
    let out = run(&[
        "analyze",
        "--state",
        path.to_str().unwrap(),
        "--criteria",
        "ppt",
        "--format",
        "table",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PPT@{2}"));
    assert!(text.contains("2.00000000000"), "{text}");
    assert!(text.contains("verdict  entangled"));
}

#[test]
fn analyze_json_is_deterministic_and_round_trips() {
    let args = ["analyze", "--builtin", "ginibre:2,3", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let parsed: sepcrit::Report64 = serde_json::from_slice(&a.stdout).unwrap();
    let again = serde_json::to_value(&parsed).unwrap();
    let orig: Value = serde_json::from_slice(&a.stdout).unwrap();
    for (x, y) in parsed
        .criteria
        .iter()
        .zip(orig["criteria"].as_array().unwrap())
    {
        assert!((x.norm - y["norm"].as_f64().unwrap()).abs() <= 1e-12);
    }
    assert_eq!(again, orig);
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad_trace = write_operator(
        dir.path(),
        "t.json",
        "state",
        &[2, 2],
        &[0.5, 0.5, 0.5, 0.5],
        &[],
    );
    let garbage = dir.path().join("g.json");
    std::fs::write(&garbage, "{\"dims\": [2, 2]}").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["analyze", "--builtin", "nonsense"],
        vec!["analyze", "--state", bad_trace.to_str().unwrap()],
        vec!["analyze", "--state", garbage.to_str().unwrap()],
        vec!["analyze", "--state", "/does/not/exist.json"],
        vec!["analyze", "--builtin", "maxent:2", "--tol", "-1"],
        vec![
            "analyze",
            "--builtin",
            "product:2,2,2,2",
            "--criteria",
            "perms",
        ],
        vec!["classify", "--dims", "2,2", "--probes", "2"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn classify_bipartite_gives_three_classes() {
    for dims in ["2,2", "3,3"] {
        let r = stdout_json(&run(&[
            "classify", "--dims", dims, "--probes", "32", "--seed", "7",
        ]));
        let classes = r["classes"].as_array().unwrap();
        assert_eq!(classes.len(), 3, "{dims}");
        let reps: Vec<&str> = classes
            .iter()
            .map(|c| c["representative"].as_str().unwrap())
            .collect();
        assert_eq!(reps[0], "1234");
    }
}

#[test]
fn classify_csv_lists_every_permutation() {
    let out = run(&["classify", "--dims", "2,2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("class,representative,permutation,class_size")
    );
    assert_eq!(lines.count(), 24);
}

#[test]
fn compile_witness_detects_maximally_entangled() {
    let dir = TempDir::new().unwrap();
    let w = reduction_witness(dir.path());
    let r = stdout_json(&run(&[
        "compile-witness",
        "--witness",
        w.to_str().unwrap(),
        "--builtin",
        "maxent:2",
    ]));
    assert!(r["trace_preserving_residual"].as_f64().unwrap() <= 1e-8);
    assert!(r["expectation"].as_f64().unwrap() < 0.0);
    assert!(r["norm"].as_f64().unwrap() > 1.0 + 1e-8);
    assert_eq!(r["detected"], true);
    assert_eq!(r["p_b"].as_array().unwrap().len(), 2);
}

#[test]
fn identity_witness_detects_nothing() {
    let dir = TempDir::new().unwrap();
    let w = write_operator(dir.path(), "id.json", "witness", &[2, 2], &[1.0; 4], &[]);
    for state in ["maxent:2", "mixed:2,2", "product:2,2"] {
        let r = stdout_json(&run(&[
            "compile-witness",
            "--witness",
            w.to_str().unwrap(),
            "--builtin",
            state,
        ]));
        assert_eq!(r["detected"], false, "{state}");
        assert!(r["norm"].as_f64().unwrap() <= 1.0 + 1e-8);
    }
}

#[test]
fn compile_witness_error_codes() {
    let dir = TempDir::new().unwrap();
    let w = reduction_witness(dir.path());
    let mismatched = run(&[
        "compile-witness",
        "--witness",
        w.to_str().unwrap(),
        "--builtin",
        "maxent:3",
    ]);
    assert_eq!(mismatched.status.code(), Some(2));
    // reduced witness is negative definite, so no map can be built
    let neg = write_operator(dir.path(), "neg.json", "witness", &[2, 2], &[-1.0; 4], &[]);
    let out = run(&[
        "compile-witness",
        "--witness",
        neg.to_str().unwrap(),
        "--builtin",
        "maxent:2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
