//! End-to-end runs of the binary: exit-code contract, JSON output, and the
//! document round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn sce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is JSON: {e}\n--- stdout ---\n{}\n--- stderr ---\n{}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        )
    })
}

#[test]
fn solve_sce_reports_objective_and_queries() {
    let game = fixture("fig1_left.json");
    let output = sce(&["solve-sce", game.to_str().unwrap(), "--lambda", "1,0"]);
    assert_eq!(output.status.code(), Some(0));
    let value = stdout_json(&output);
    assert_eq!(value["objective"], "5");
    assert_eq!(value["oracle_queries"], 4);
    assert_eq!(value["vector"]["form"], "compact");
}

#[test]
fn verify_exit_codes_follow_the_verdict() {
    let game = fixture("fig1_left.json");
    let x = fixture("example_x.json");
    let x_prime = fixture("example_x_prime.json");

    let output = sce(&[
        "verify",
        game.to_str().unwrap(),
        "--vector",
        x.to_str().unwrap(),
        "--mode",
        "first-level",
    ]);
    assert_eq!(output.status.code(), Some(0));

    let output = sce(&[
        "verify",
        game.to_str().unwrap(),
        "--vector",
        x.to_str().unwrap(),
        "--mode",
        "perfect",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert_eq!(stdout_json(&output)["verdict"], Value::Bool(false));

    let output = sce(&[
        "verify",
        game.to_str().unwrap(),
        "--vector",
        x_prime.to_str().unwrap(),
        "--mode",
        "sce-pa",
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout_json(&output)["verdict"], Value::Bool(true));
}

#[test]
fn input_errors_exit_two() {
    let game = fixture("fig1_left.json");
    // Wrong weight count.
    let output = sce(&["solve-sce", game.to_str().unwrap(), "--lambda", "1"]);
    assert_eq!(output.status.code(), Some(2));
    // Weight out of range.
    let output = sce(&["solve-sce", game.to_str().unwrap(), "--lambda", "2,0"]);
    assert_eq!(output.status.code(), Some(2));
    // Zero weight is rejected by the positive-weight solver only.
    let output = sce(&["solve-sce-pa-any", game.to_str().unwrap(), "--lambda", "1,0"]);
    assert_eq!(output.status.code(), Some(2));
    // Missing file.
    let output = sce(&["solve-sce", "/no/such/game.json", "--lambda", "1,0"]);
    assert_eq!(output.status.code(), Some(2));
    // Unknown verb (clap's own error code).
    let output = sce(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
    // Malformed document.
    let bad = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(bad.path(), "{\"players\": 1}").unwrap();
    let output = sce(&["solve-sce", bad.path().to_str().unwrap(), "--lambda", "1"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn emitted_plans_reload_identically() {
    let game_path = fixture("table4_ordering.json");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let output = sce(&[
        "solve-sce-pa-opt",
        game_path.to_str().unwrap(),
        "--lambda",
        "0,0,1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));

    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["objective"], "10");
    assert_eq!(report["oracle_queries"], 13);

    // The emitted plan reloads bit-exactly and re-verifies.
    let sg = sce_core::document::load_game(&std::fs::read_to_string(&game_path).unwrap()).unwrap();
    let reloaded =
        sce_core::document::load_vector(&report["vector"].to_string(), &sg).unwrap();
    let weights = sce_core::solver::LeaderWeights::new(vec![
        sce_core::rational::rat(0),
        sce_core::rational::rat(0),
        sce_core::rational::rat(1),
    ])
    .unwrap();
    let direct = sce_core::solver::solve_opt_sce_pa(&sg, &weights).unwrap();
    assert_eq!(reloaded, direct.vector);

    // And passes verification through the CLI as well.
    let vector_path = dir.path().join("vector.json");
    std::fs::write(&vector_path, report["vector"].to_string()).unwrap();
    let output = sce(&[
        "verify",
        game_path.to_str().unwrap(),
        "--vector",
        vector_path.to_str().unwrap(),
        "--mode",
        "perfect",
    ]);
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn dnf_check_answers_both_ways() {
    let output = sce(&["dnf", "(v1) | (!v1)", "--check"]);
    assert_eq!(output.status.code(), Some(0));
    let value = stdout_json(&output);
    assert_eq!(value["tautology"], Value::Bool(true));
    assert_eq!(value["perfectly_stable"], Value::Bool(true));

    let output = sce(&["dnf", "(v1 & !v2) | (v2 & !v1)", "--check", "--swmax"]);
    assert_eq!(output.status.code(), Some(1));
    let value = stdout_json(&output);
    assert_eq!(value["tautology"], Value::Bool(false));
    assert_eq!(value["perfectly_stable"], Value::Bool(false));

    let output = sce(&["dnf", "(v1 &) | v2"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn fixtures_and_relations_run_clean() {
    let output = sce(&["fixtures"]);
    assert_eq!(output.status.code(), Some(0));
    let value = stdout_json(&output);
    let entries = value["fixtures"].as_array().unwrap();
    assert_eq!(entries.len(), 8);
    assert!(entries.iter().all(|f| f["status"] == "ok"));

    let game = fixture("table5_left.json");
    let output = sce(&["relations", game.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(output.status.code(), Some(0));
    let value = stdout_json(&output);
    assert!(value["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["holds"] == Value::Bool(true)));
}

#[test]
fn optimal_commitment_single_leader_contract() {
    // The bundled games all have multiple leaders; restrict one on the fly.
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("table5_left.json")).unwrap();
    let single = text.replace("\"leaders\": [1, 2]", "\"leaders\": [1]");
    let path = dir.path().join("single.json");
    std::fs::write(&path, single).unwrap();

    let output = sce(&["optimal-commitment", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let value = stdout_json(&output);
    assert_eq!(value["value"], "1");

    let output = sce(&["optimal-commitment", fixture("table5_left.json").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2), "two leaders are rejected");
}
