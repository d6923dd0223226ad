use std::io::Write;
use std::process::{Command, Output, Stdio};

fn intgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intgame")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn deep_json(bytes: &[u8]) -> serde_json::Value {
    use serde::Deserialize;
    let mut de = serde_json::Deserializer::from_slice(bytes);
    de.disable_recursion_limit();
    serde_json::Value::deserialize(&mut de).unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_intgame"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn prove_exit_codes() {
    let o = intgame(&["prove", "(P1 & (P1 o- P2)) o- P2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("provable"));
    let o = intgame(&["prove", "((P1 o- P2) o- P1) o- P1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("countermodel"));
    let o = intgame(&["prove", "P1 o-"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn axiom_proof() {
    let o = intgame(&["--format", "json", "prove", "P1 => P1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["provable"], true);
    assert_eq!(v["proof"]["rule"], "Axiom");
}

#[test]
fn proofs_round_trip_through_check_proof() {
    let o = intgame(&["--format", "json", "prove", "(P1 o- (P2 o- P3)) o- ((P1 o- P2) o- (P1 o- P3))"]);
    let v = deep_json(&o.stdout);
    let dir = std::env::temp_dir().join(format!("intgame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.json");
    std::fs::write(&good, v["proof"].to_string()).unwrap();
    assert_eq!(intgame(&["check-proof", good.to_str().unwrap()]).status.code(), Some(0));
    let mut bad = v["proof"].clone();
    bad["conclusion"] = serde_json::json!(" => P1");
    let badf = dir.join("bad.json");
    std::fs::write(&badf, bad.to_string()).unwrap();
    let o = intgame(&["check-proof", badf.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(1 | 2)), "{o:?}");
}

#[test]
fn countermodel_command() {
    let o = intgame(&["countermodel", "P1 | (P1 o- P2)"]);
    assert_eq!(o.status.code(), Some(2));
    let o = intgame(&["countermodel", "P1 o- P1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn transforms() {
    let o = intgame(&["transform", "dedollarize", "$ o- P2"]);
    assert_eq!(stdout(&o).trim(), "P1 & P2 o- P2");
    let o = intgame(&["transform", "standardize", "P1 o- P2"]);
    assert!(stdout(&o).starts_with("P3 o- P1 o- P2 | P2, (P1 o- P2) o- P3 => P3"));
    let o = intgame(&["transform", "desequentize", "P1 o- P2"]);
    assert_eq!(stdout(&o).trim(), "!(P3 /\\ P1 -> P2 | P2) /\\ !((!P1 -> P2) -> P3) -> P3");
    let o = intgame(&["transform", "desequentize", "--n", "2", "P3 o- (P1 o- (P2 | P2)), (P1 o- P2) o- P3 => P3"]);
    assert_eq!(stdout(&o).matches("!P1").count(), 2);
    let o = intgame(&["transform", "elementarize", "P1 o- P2"]);
    assert!(stdout(&o).contains("Ex.P3(x)"));
    assert_eq!(intgame(&["transform", "standardize", "$ o- P2"]).status.code(), Some(1));
}

#[test]
fn pipeline_bundle_is_reproducible() {
    let args = ["--format", "json", "pipeline", "((P1 o- P2) o- P1) o- P1"];
    let a = intgame(&args);
    let b = intgame(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["refuted"], true);
    assert_eq!(v["sessions"].as_array().unwrap().len(), 7);
    assert!(v["sessions"].as_array().unwrap().iter().all(|s| s["verdict"] == "Bottom"));
}

#[test]
fn pipeline_with_dollar() {
    let o = intgame(&["pipeline", "P1 | (P1 o- $)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("F: P1 | (P1 o- P2 & P1)"));
}

#[test]
fn pipeline_refuses_provable() {
    let o = intgame(&["pipeline", "P1 o- P1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("provable"));
}

#[test]
fn arena_is_reproducible() {
    let args = ["--format", "json", "arena", "(P1 & (P1 o- P2)) o- P2", "--top", "extract", "--bottom", "random:4"];
    let a = intgame(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, intgame(&args).stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["verdict"], "Top");
}

#[test]
fn extract_strategy_validates() {
    let o = intgame(&["--plays", "5", "extract-strategy", "P1 => P1", "--validate"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("won 25/25 plays"), "{}", stdout(&o));
    assert_eq!(intgame(&["extract-strategy", "P1 | P2"]).status.code(), Some(2));
}

#[test]
fn play_against_copycat_loses() {
    let dir = std::env::temp_dir().join(format!("intgame-play-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let interp = dir.join("i.json");
    std::fs::write(&interp, r#"{"atoms": {"P1": {"cand": [true, false]}}}"#).unwrap();
    let args = ["play", "--ai", "~P1 \\/ P1", "--machine", "ccs", "--interp", interp.to_str().unwrap()];
    // Choosing the false component in the consequent is copied into the antecedent.
    let o = with_stdin(&args, "7\n2.2\npass\n");
    let out = stdout(&o);
    assert!(out.contains("illegal move 7; legal moves: 2.1 2.2"), "{out}");
    assert!(out.contains("machine: 1.2"), "{out}");
    assert!(out.trim_end().ends_with("verdict: Top"), "{out}");
}

#[test]
fn play_refusing_own_choice_loses() {
    // Top must choose in a choice disjunction; passing leaves it unmade.
    let o = with_stdin(&["play", "--ai", "P1 | P2", "--side", "top", "--machine", "idle"], "pass\n");
    assert!(stdout(&o).trim_end().ends_with("verdict: Bottom"), "{}", stdout(&o));
}

#[test]
fn play_quit_evaluates_partial_run() {
    let o = with_stdin(
        &["play", "--ai", "P1 | P2", "--side", "top", "--machine", "idle", "--interp", "sample:3"],
        "quit\n",
    );
    assert!(stdout(&o).contains("verdict: Bottom"));
}
