use std::fs;
use std::process::{Command, Output};

fn fibmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibmap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zeck_prints_the_representation() {
    let o = fibmap(&["zeck", "12"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "12 = u(1)+u(3)+u(5)");
}

#[test]
fn knead_lists_class_a_symbols() {
    let o = fibmap(&["knead", "--depth", "13", "--class-a", "plus"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("JMPJPJMMJMPJM"), "{}", stdout(&o));
}

#[test]
fn entropy_reports_the_golden_value() {
    let o = fibmap(&["entropy", "--depth", "400", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let text = v.to_string();
    assert!(text.contains("0.5476"), "{text}");
}

#[test]
fn csv_output_has_a_header_row() {
    let o = fibmap(&["knead", "--depth", "8", "--csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().contains(','));
    assert!(lines.count() >= 8);
}

#[test]
fn domain_error_exits_one() {
    let o = fibmap(&["zeck", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("fibmap: [domain]"), "{}", stderr(&o));
}

#[test]
fn malformed_number_exits_two() {
    let o = fibmap(&["zeck", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("fibmap: [malformed]"), "{}", stderr(&o));
}

#[test]
fn undeclared_global_flag_is_a_usage_error() {
    let o = fibmap(&["zeck", "5", "--depth", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[usage]"), "{}", stderr(&o));
}

#[test]
fn seedless_is_rejected() {
    let o = fibmap(&["zeck", "5", "--seedless"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[usage]"), "{}", stderr(&o));
}

#[test]
fn missing_output_directory_is_an_io_error() {
    let o = fibmap(&["zeck", "5", "--out", "/nonexistent/fibmap-out"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[io]"), "{}", stderr(&o));
}

#[test]
fn replay_reproduces_and_detects_tampering() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let d1 = first.path().to_str().unwrap();
    let d2 = second.path().to_str().unwrap();

    let o = fibmap(&["knead", "--depth", "10", "--class-a", "minus", "--out", d1]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "knead");
    assert_eq!(manifest["params"]["depth"], "10");
    assert_eq!(manifest["outputs"].as_object().unwrap().len(), 2);

    let o = fibmap(&["replay", d1, "--out", d2]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(first.path().join("knead.csv")).unwrap(),
        fs::read(second.path().join("knead.csv")).unwrap()
    );

    let path = first.path().join("manifest.json");
    let text = fs::read_to_string(&path).unwrap();
    let digest = manifest["outputs"]["knead.csv"].as_str().unwrap();
    fs::write(&path, text.replace(digest, &"0".repeat(64))).unwrap();
    let o = fibmap(&["replay", d1, "--out", d2]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[replay]") && stderr(&o).contains("knead.csv"), "{}", stderr(&o));
}

#[test]
fn renorm_example_tower_passes() {
    let o = fibmap(&["renorm", "--depth", "9", "--levels", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("all checks pass: true"), "{}", stdout(&o));
}

#[test]
fn model_checks_the_conjugacy() {
    let o = fibmap(&["model", "--depth", "8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("for m = 1..8: true"), "{}", stdout(&o));
}
