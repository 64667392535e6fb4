use std::fs;
use std::process::{Command, Output};

use srflp::generate_random_instance;

fn srflp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srflp")).args(args).output().unwrap()
}

fn instance_file(dir: &tempfile::TempDir, n: usize) -> String {
    let path = dir.path().join(format!("inst{n}.txt"));
    fs::write(&path, generate_random_instance(n, (1, 10), (0, 10), n as u64).unwrap().render()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn json_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance_file(&dir, 15);
    let out = srflp(&["--instance", &inst, "--runs", "2", "--iter-budget", "3000000", "--zhat", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 15);
    assert_eq!(v["per_run"].as_array().unwrap().len(), 2);
    assert!(v["per_run"][0]["wall_seconds"].is_null());
    assert_eq!(v["per_run"][1]["seed"], 2);
    let mut layout: Vec<u64> = v["per_run"][0]["layout"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    layout.sort();
    assert_eq!(layout, (1..=15).collect::<Vec<_>>());
}

#[test]
fn csv_and_table_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance_file(&dir, 10);
    let csv_path = dir.path().join("r.csv");
    let out = srflp(&[
        "--instance", &inst, "--runs", "3", "--iter-budget", "1000000", "--format", "csv", "--output",
        csv_path.to_str().unwrap(), "--no-window",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&csv_path).unwrap();
    assert!(text.starts_with("# instance inst10"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
    let out = srflp(&["--instance", &inst, "--runs", "1", "--iter-budget", "1000000", "--format", "table-text"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("BEST "));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance_file(&dir, 6);
    assert_eq!(srflp(&["--instance", &inst, "--runs", "0"]).status.code(), Some(1));
    assert_eq!(srflp(&["--instance", &inst, "--alpha", "1.5"]).status.code(), Some(1));
    assert_eq!(srflp(&["--instance", &inst, "--format", "xml"]).status.code(), Some(1));
    assert_eq!(srflp(&["--runs", "2"]).status.code(), Some(1));
    assert_eq!(srflp(&["--instance", "/nonexistent/file"]).status.code(), Some(2));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "3\n1 2 3\n0 1 2\n1 0\n").unwrap();
    let out = srflp(&["--instance", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
    assert_eq!(srflp(&["--help"]).status.code(), Some(0));
}

#[test]
fn bruteforce_backend_and_model_export() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance_file(&dir, 12);
    let models = dir.path().join("models");
    let out = srflp(&[
        "--instance", &inst, "--runs", "1", "--iter-budget", "2000000", "--backend", "bruteforce", "--zhat", "2", "--wsv-msa", "6",
        "--wsv-refine", "8", "--export-mip", models.to_str().unwrap(), "--export-limit", "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(&models).unwrap().count(), 3);
    // bruteforce is capped at 10 facilities per window
    let out = srflp(&["--instance", &inst, "--runs", "1", "--iter-budget", "2000000", "--backend", "bruteforce"]);
    assert_eq!(out.status.code(), Some(1));
}
