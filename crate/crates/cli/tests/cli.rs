use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use worldsim::history::parse_log;
use worldsim::worlds::chess::chess_signature;

fn repo(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn worldsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_worldsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn tmp(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn read_json(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_reports_by_exit_code() {
    for w in ["chess.json", "coin.def2.json", "lamp.def4.json", "doors.json"] {
        let o = worldsim(&["validate", &repo(&format!("worlds/{w}"))]);
        assert_eq!(code(&o), 0, "{w}: {}", stderr(&o));
    }
    let o = worldsim(&["validate", &repo("worlds/overfull.def2.json")]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains("(1)") && text.contains("i=1"), "{text}");
    assert!(text.contains("sum(lo) <= 1"), "{text}");
}

#[test]
fn unreadable_input_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let bad = tmp(&dir, "bad.json");
    std::fs::write(&bad, "{\n  \"kind\": \"def2\",\n  oops\n}").unwrap();
    let o = worldsim(&["validate", &bad]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert_eq!(code(&worldsim(&["validate", &tmp(&dir, "missing.json")])), 2);
    assert_eq!(code(&worldsim(&["run", "--horizon", "x", &bad])), 2);
}

#[test]
fn horizon_zero_logs_only_the_opening_step() {
    let o = worldsim(&["run", &repo("worlds/chess.json"), "--horizon", "0"]);
    assert_eq!(code(&o), 0);
    let hs = parse_log(&stdout(&o), &chess_signature()).unwrap();
    assert_eq!(hs.len(), 1);
    assert_eq!(hs[0].len(), 1);
    assert_eq!(hs[0].steps()[0].action, chess_signature().nothing_action());
}

#[test]
fn runs_are_reproducible_from_seeds() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (tmp(&dir, "a.log"), tmp(&dir, "b.log"));
    let world = repo("worlds/chess.json");
    for out in [&a, &b] {
        let o = worldsim(&["run", &world, "--horizon", "999", "--seed", "5", "--out", out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let la = std::fs::read(&a).unwrap();
    assert_eq!(la, std::fs::read(&b).unwrap());
    let hs = parse_log(&String::from_utf8(la.clone()).unwrap(), &chess_signature()).unwrap();
    assert_eq!(hs[0].len(), 1000);

    let o = worldsim(&["run", &world, "--horizon", "999", "--seed", "5", "--seed-policy", "77"]);
    assert_ne!(o.stdout, la);
}

#[test]
fn agent_replay_matches_live_run() {
    let dir = TempDir::new().unwrap();
    let (live, replay, log) = (tmp(&dir, "live.json"), tmp(&dir, "replay.json"), tmp(&dir, "run.log"));
    let (world, spec) = (repo("worlds/chess.json"), repo("agents/chess.json"));
    let o = worldsim(&[
        "agent", &world, &spec, "--episodes", "2", "--horizon", "300", "--seed", "9", "--out", &live, "--save-log", &log,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = worldsim(&["agent", &world, &spec, "--log", &log, "--out", &replay]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (l, r) = (read_json(&live), read_json(&replay));
    assert_eq!(l["tests"], r["tests"]);
    assert_eq!(l["steps"], r["steps"]);
    assert_eq!(l["config"]["horizon"], 300);
    assert!(l["config"]["parameters"]["noise_color_volume"].is_number());

    // The universally valid condition is defined at every moment.
    let won = l["tests"].as_array().unwrap().iter().find(|t| t["name"] == "game_won").unwrap();
    assert_eq!(won["defined_moments"], l["steps"]);

    let text = stdout(&worldsim(&["report", &live, "--test", "game_won"]));
    assert!(text.contains("test game_won") && !text.contains("white_can_lift"), "{text}");
    assert_eq!(code(&worldsim(&["report", &live, "--test", "nope"])), 2);
}

#[test]
fn empty_run_gives_uninformed_records() {
    let o = worldsim(&["agent", &repo("worlds/doors.json"), &repo("agents/doors.json"), "--episodes", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for g in report["tests"][0]["groups"].as_array().unwrap() {
        for e in g["experiments"].as_array().unwrap() {
            assert_eq!((e["n"].as_u64(), e["m"].as_u64()), (Some(0), Some(0)));
            assert_eq!(e["prediction"], 0.5);
            assert_eq!(e["confidence"], 0.0);
        }
    }
}

#[test]
fn doors_agent_learns_the_schedule() {
    let o = worldsim(&["agent", &repo("worlds/doors.json"), &repo("agents/doors.json"), "--horizon", "499", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let truth = [0.0, 1.0, 0.0];
    for (g, want) in report["tests"][0]["groups"].as_array().unwrap().iter().zip(truth) {
        let p = g["estimate"]["prediction"].as_f64().unwrap();
        assert!((p - want).abs() <= 0.05, "{}: {p}", g["group"]);
    }
}

#[test]
fn transform_then_compare_traces() {
    let dir = TempDir::new().unwrap();
    let (d3, d2) = (tmp(&dir, "lamp3.json"), tmp(&dir, "lamp2.json"));
    let src = repo("worlds/lamp.def4.json");
    assert_eq!(code(&worldsim(&["transform", "--from", "def4", "--to", "def3", &src, &d3])), 0);
    assert_eq!(code(&worldsim(&["transform", "--to", "def2", &src, &d2])), 0);
    assert_eq!(code(&worldsim(&["validate", &d3])), 0);
    assert_eq!(code(&worldsim(&["validate", &d2])), 0);
    assert_eq!(read_json(&d3)["kind"], "def3");

    for img in [&d3, &d2] {
        let o = worldsim(&["equiv-check", &src, img, "--episodes", "20000", "--horizon", "2", "--max-tv", "0.03"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(report["per_step"].as_array().unwrap().len(), 3);
    }
    let coin = repo("worlds/coin.def2.json");
    let o = worldsim(&["equiv-check", &coin, &coin, "--determinize", "--episodes", "20000", "--horizon", "2", "--max-tv", "0.03"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // Worlds over different observation spaces cannot be compared.
    let o = worldsim(&["equiv-check", &coin, &d2, "--episodes", "100", "--horizon", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn transform_errors_map_to_exit_codes() {
    let doors = repo("worlds/doors.json");
    let o = worldsim(&["transform", "--to", "def2", &doors, "--cap", "2"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("cap"));
    assert_eq!(code(&worldsim(&["transform", "--to", "def2", &repo("worlds/chess.json")])), 2);
    assert_eq!(code(&worldsim(&["transform", "--from", "def3", "--to", "def2", &repo("worlds/lamp.def4.json")])), 2);
    assert_eq!(code(&worldsim(&["transform", "--to", "def3", &doors])), 2);
}

#[test]
fn tv_threshold_fails_with_one() {
    let dir = TempDir::new().unwrap();
    let a = repo("worlds/coin.def2.json");
    let biased = tmp(&dir, "biased.json");
    let text = std::fs::read_to_string(&a).unwrap().replace("[\"a\", 50, 50], [\"b\", 50, 50]", "[\"a\", 90, 90], [\"b\", 10, 10]");
    std::fs::write(&biased, text).unwrap();
    let o = worldsim(&["equiv-check", &a, &biased, "--episodes", "5000", "--horizon", "2", "--max-tv", "0.05"]);
    assert_eq!(code(&o), 1);
}
