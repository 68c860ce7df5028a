use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rpotent"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SWAP: &str = r#"{"weights":[1,1],"matrix":[[0,1],[1,0]],"r":3}"#;
const SWAP_FIXED: &str = r#"{"weights":[1,1,1],"matrix":[[0,1,0],[1,0,0],[0,0,1]],"r":3}"#;

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        run(&["validate", p(&write(&dir, "a.json", SWAP))])
            .status
            .code(),
        Some(0)
    );

    let nil = write(
        &dir,
        "b.json",
        r#"{"weights":[1,1],"matrix":[[0,1],[0,0]],"r":3}"#,
    );
    let out = run(&["validate", p(&nil)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["potency_residual"].as_f64(), Some(1.0));

    let bad = write(&dir, "c.json", r#"{"weights":[1,1],"matrix":[[0,1"#);
    let out = run(&["validate", p(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());

    let out = run(&["validate", p(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn negative_entries_are_invalid_operators() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "neg.json",
        r#"{"weights":[1,1],"matrix":[[1,-1],[1,-1]],"r":2}"#,
    );
    assert_eq!(run(&["decompose", p(&f)]).status.code(), Some(2));
    assert_eq!(run(&["orthogonalize", p(&f)]).status.code(), Some(2));
}

#[test]
fn orthogonalize_outputs() {
    let dir = TempDir::new().unwrap();
    let id3 = write(
        &dir,
        "id.json",
        r#"{"weights":[1,1,1],"matrix":[[1,0,0],[0,1,0],[0,0,1]],"r":2}"#,
    );
    let out = run(&["orthogonalize", p(&id3), "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["basis"].as_array().unwrap().len(), 3);
    assert_eq!(v["supports"], serde_json::json!([[1], [2], [3]]));
    assert!(v["trace"].is_object());

    let rank_one = write(
        &dir,
        "r1.json",
        r#"{"weights":[1,1],"matrix":[[1,1],[0,0]],"r":2}"#,
    );
    let v = json(&run(&["orthogonalize", p(&rank_one)]));
    let basis: Vec<Vec<f64>> = serde_json::from_value(v["basis"].clone()).unwrap();
    assert_eq!(basis, vec![vec![1.0, 0.0]]);

    let dest = dir.path().join("basis.json");
    let out = run(&[
        "orthogonalize",
        p(&write(&dir, "s.json", SWAP_FIXED)),
        "--out",
        p(&dest),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(v["supports"], serde_json::json!([[1], [2], [3]]));
}

#[test]
fn orthogonalize_notes_kernel_witness() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "k.json",
        r#"{"weights":[1,1],"matrix":[[1,0],[0,0]],"r":2}"#,
    );
    let out = run(&["orthogonalize", p(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["kernel_witness"].is_array());
    assert!(!v["notes"].as_array().unwrap().is_empty());
}

#[test]
fn decompose_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = run(&["decompose", p(&write(&dir, "a.json", SWAP_FIXED))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["witness_U"], serde_json::json!([3]));
    assert_eq!(v["verdict"], "DecomposableByU");
    assert!(v["tool_version"].is_string());
    assert_eq!(v["tolerances"]["tol_orth"].as_f64(), Some(1e-9));

    let out = run(&["decompose", p(&write(&dir, "b.json", SWAP))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], "NotDecomposable");

    let big = dir.path().join("big.json");
    let gen = run(&[
        "generate",
        "--n",
        "20",
        "--N",
        "2",
        "--r",
        "3",
        "--cycles",
        "2",
        "--seed",
        "4",
        "--out",
        p(&big),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let out = run(&["decompose", p(&big)]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(json(&out)["verdict"], "Unknown");
}

#[test]
fn certificate_round_trips() {
    let dir = TempDir::new().unwrap();
    let dest = dir.path().join("cert.json");
    let out = run(&[
        "decompose",
        p(&write(&dir, "a.json", SWAP_FIXED)),
        "--out",
        p(&dest),
        "--trace",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&dest).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let cert: rpotent::decomposer::DecompositionCertificate =
        serde_json::from_value(v.clone()).unwrap();
    let again: Value = serde_json::from_str(&rpotent::io::to_json_string(&cert).unwrap()).unwrap();
    for (k, val) in again.as_object().unwrap() {
        assert_eq!(&v[k], val, "field {k}");
    }
}

#[test]
fn generate_contract() {
    let dir = TempDir::new().unwrap();
    let args = [
        "generate", "--n", "3", "--N", "3", "--r", "3", "--cycles", "2,1", "--seed", "1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["ground_truth"].is_object());
    let path = dir.path().join("g.json");
    std::fs::write(&path, &a.stdout).unwrap();
    assert_eq!(run(&["validate", p(&path)]).status.code(), Some(0));

    let bad = run(&[
        "generate", "--n", "3", "--N", "3", "--r", "3", "--cycles", "3",
    ]);
    assert_eq!(bad.status.code(), Some(3));
    let bad = run(&[
        "generate", "--n", "3", "--N", "3", "--r", "3", "--cycles", "two",
    ]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn round_trip_preserves_residuals() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("g.json");
    let out = run(&[
        "generate",
        "--n",
        "11",
        "--N",
        "5",
        "--r",
        "4",
        "--cycles",
        "3,1,1",
        "--seed",
        "9",
        "--scalars",
        "random",
        "--weights",
        "random",
        "--values",
        "random",
        "--leftover",
        "2",
        "--shuffle",
        "--out",
        p(&path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let file = rpotent::io::read_operator_file(&path).unwrap();
    let cfg = rpotent::measure_space::ToleranceConfig::default();
    let op = file.to_operator(&cfg).unwrap();
    let from_file = op.validate(&cfg);
    let reported = json(&run(&["validate", p(&path)]));
    assert!(
        (reported["potency_residual"].as_f64().unwrap() - from_file.potency_residual).abs()
            <= 1e-12
    );

    let again = rpotent::io::to_json_string(&file).unwrap();
    assert_eq!(again, std::fs::read_to_string(&path).unwrap());
}

#[test]
fn suite_command() {
    let out = run(&["suite", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["count"], 0);
    assert_eq!(v["all_pass"], true);

    let out = run(&["suite", "--grid", "boundary", "--count", "6", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["boundary"]["cases"], 6);
    assert_eq!(v["verdicts"]["not_decomposable"], 6);

    assert_eq!(run(&["suite", "--grid", "huge"]).status.code(), Some(3));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["--bogus"]).status.code(), Some(3));
    assert_eq!(run(&[]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(
        run(&["--tol-orth", "-1", "suite", "--count", "0"])
            .status
            .code(),
        Some(3)
    );
}
