use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tickmc::dsl::parse_config;

const COINS: &str = "
domain Face { heads, tails }
var a : Face = heads;
var b : Face = heads;
const N : count;
horizon N;
machine A {
  initial S;
  state S;
  from S goto [0.5] S set a := heads or [0.5] S set a := tails;
}
machine B {
  initial S;
  state S;
  from S goto [0.5] S set b := heads or [0.5] S set b := tails;
}
";

const COIN_PROPS: &str = "
prob property Tails:
  Prob=? of [Finally a==tails /\\ b==tails /\\ ticks==t]
  with constants C
  for t in 0..3

prob property Live:
  not Exists [Finally deadlock]
  with constant C
";

// Stops after one tick and never reaches the horizon.
const STUCK: &str = "
const N : count;
horizon N;
machine M {
  initial Go;
  state Go;
  final state Stop;
  from Go goto [1] Stop;
}
";

const LIVE_ONLY: &str = "prob property Live: not Exists [Finally deadlock] with constant C";

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../tickmc/models")
}

fn tickmc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tickmc"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn coins() -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("coins.psm"), COINS).unwrap();
    fs::write(dir.path().join("coins.pprop"), COIN_PROPS).unwrap();
    fs::write(dir.path().join("coins.pcfg"), "config C { N = 3; }").unwrap();
    dir
}

#[test]
fn check_reports_probabilities() {
    let dir = coins();
    let out = tickmc(dir.path(), &["check", "coins.psm", "--props", "coins.pprop", "--config", "C"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let results: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let tails = &results[0];
    assert_eq!(tails["property"], "Tails");
    let points = tails["points"].as_array().unwrap();
    assert_eq!(points.len(), 4);
    assert_eq!(points[0]["p"], 0.0);
    assert_eq!(points[2]["p"], 0.25);
    assert_eq!(results[1]["deadlockFree"], true);
}

#[test]
fn deadlock_exits_one_with_a_path() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("stuck.psm"), STUCK).unwrap();
    fs::write(dir.path().join("stuck.pprop"), LIVE_ONLY).unwrap();
    fs::write(dir.path().join("stuck.pcfg"), "config C { N = 3; }").unwrap();
    let out = tickmc(dir.path(), &["check", "stuck.psm", "--props", "stuck.pprop"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("\"deadlockFree\": false"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Stop"));
}

#[test]
fn input_errors_exit_two() {
    let dir = coins();
    fs::write(dir.path().join("bad.psm"), "machine M { initial Nowhere; }").unwrap();
    let cases: [&[&str]; 4] = [
        &["check", "missing.psm", "--props", "coins.pprop"],
        &["check", "bad.psm", "--props", "coins.pprop"],
        &["check", "coins.psm", "--props", "coins.pprop", "--config", "Nope"],
        &["sweep", "coins.psm", "--props", "coins.pprop", "--t-range", "0..9"],
    ];
    for args in cases {
        let out = tickmc(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn state_cap_exits_three() {
    let out = tickmc(
        &models(),
        &["check", "uvc.psm", "--props", "uvc.pprop", "--state-cap", "50"],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn out_writes_payload_and_manifest() {
    let dir = coins();
    let out = tickmc(
        dir.path(),
        &["simulate", "coins.psm", "--props", "coins.pprop", "--t", "2", "--samples", "1000", "--seed", "7", "--out", "est.json"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let estimate: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("est.json")).unwrap()).unwrap();
    assert_eq!(estimate["samples"], 1000);
    assert_eq!(estimate["seed"], 7);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("est.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    let hashes = manifest["inputs"].as_object().unwrap();
    assert!(hashes.keys().any(|k| k.ends_with("coins.psm")));
    assert!(hashes.values().all(|h| h.as_str().unwrap().len() == 64));
}

#[test]
fn bundled_sweep_has_every_scenario() {
    let out = tickmc(
        &models(),
        &["sweep", "uvc.psm", "--props", "uvc.pprop", "--configs", "scenarios.pcfg", "--t-range", "1..30"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scenario,awareness,ods,t,probability,mode"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 270);
    assert!(rows.iter().any(|r| r.starts_with("deliberate_failure,deliberate,failure,3,0.091")));
}

#[test]
fn export_formats() {
    let dir = coins();
    let prism = tickmc(dir.path(), &["export", "coins.psm", "--config", "C", "--format", "prism"]);
    assert_eq!(prism.status.code(), Some(0));
    let text = stdout(&prism);
    assert!(text.lines().any(|l| l == "dtmc"));
    assert!(text.contains("0.25 : "));
    let dot = tickmc(dir.path(), &["export", "coins.psm", "--config", "C", "--format", "dot"]);
    assert!(stdout(&dot).starts_with("digraph dtmc {"));
    let json = tickmc(dir.path(), &["export", "coins.psm", "--config", "C", "--format", "json"]);
    let dump: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert!(!dump["states"].as_array().unwrap().is_empty());
}

#[test]
fn scenarios_lists_nine_configs() {
    let out = tickmc(&models(), &["scenarios"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.matches("config ").count(), 9);
    let bundled = fs::read_to_string(models().join("scenarios.pcfg")).unwrap();
    assert_eq!(parse_config(&text).unwrap(), parse_config(&bundled).unwrap());
}
