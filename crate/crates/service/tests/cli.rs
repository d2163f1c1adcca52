use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn taskalloc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_taskalloc")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = taskalloc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_then_allocate_with_every_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    let s = scenario.to_str().unwrap();
    ok(&["simulate", "--tasks", "24", "--analysts", "4", "--seed", "3", "--out", s]);
    let parsed = read_json(&scenario);
    assert_eq!(parsed["tasks"].as_array().unwrap().len(), 24);
    assert_eq!(ok(&["simulate", "--tasks", "24", "--analysts", "4", "--seed", "3"]).trim(), std::fs::read_to_string(&scenario).unwrap().trim());

    for strategy in ["ga", "greedy", "greedy-hc", "manager-eff", "manager-bal"] {
        let out = dir.path().join(format!("{strategy}.json"));
        ok(&[
            "allocate", "--scenario", s, "--strategy", strategy, "--objective", "completion-pref", "--pop", "30",
            "--gens", "4", "--seed", "1", "--out", out.to_str().unwrap(),
        ]);
        let a = read_json(&out);
        assert_eq!(a["strategy"], strategy);
        assert_eq!(a["objective"], "completion-pref");
        assert_eq!(a["genes"].as_array().unwrap().len(), 24);
        assert!(a["utility"]["global"].as_f64().unwrap() >= 0.0);
        assert!(!a["run_id"].as_str().unwrap().is_empty());
    }
    let ga = read_json(&dir.path().join("ga.json"));
    assert_eq!(ga["evaluations"], 30 + 4 * (30 - 10));
}

#[test]
fn allocate_is_reproducible_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    let s = scenario.to_str().unwrap();
    ok(&["simulate", "--tasks", "20", "--analysts", "4", "--seed", "8", "--out", s]);
    let args = ["allocate", "--scenario", s, "--pop", "40", "--gens", "5", "--seed", "9"];
    let a: Value = serde_json::from_str(&ok(&args)).unwrap();
    let b: Value = serde_json::from_str(&ok(&args)).unwrap();
    assert_eq!(a["genes"], b["genes"]);
    assert_eq!(a["utility"], b["utility"]);
}

#[test]
fn auto_drop_on_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    let s = scenario.to_str().unwrap();
    ok(&["simulate", "--tasks", "20", "--analysts", "4", "--seed", "2", "--out", s]);
    let mut v = read_json(&scenario);
    for a in v["analysts"].as_array_mut().unwrap() {
        let avail = a["availability"].as_u64().unwrap();
        a["availability"] = (avail * 7 / 10).into();
    }
    std::fs::write(&scenario, v.to_string()).unwrap();
    let out: Value = serde_json::from_str(&ok(&["allocate", "--scenario", s, "--strategy", "greedy", "--auto-drop"])).unwrap();
    let dropped = out["dropped"].as_array().unwrap().len();
    assert!(dropped > 0);
    assert_eq!(out["genes"].as_array().unwrap().len(), 20 - dropped);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = taskalloc(&["allocate", "--scenario", "/nonexistent.json"]);
    assert!(!out.status.success());
    let out = taskalloc(&["allocate", "--scenario", "x.json", "--objective", "speed"]);
    assert!(!out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    ok(&["simulate", "--tasks", "4", "--analysts", "2", "--out", bad.to_str().unwrap()]);
    let mut v = read_json(&bad);
    v["tasks"][0]["precision"] = 2.0.into();
    std::fs::write(&bad, v.to_string()).unwrap();
    let out = taskalloc(&["allocate", "--scenario", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("precision"));
}

#[test]
fn compare_writes_a_row_per_strategy_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    ok(&["compare", "--runs", "2", "--pop", "30", "--gens", "3", "--seed", "4", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 5);
}
