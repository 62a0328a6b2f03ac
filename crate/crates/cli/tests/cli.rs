use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(scenario: &str, extra: &[&str]) -> (Output, TempDir) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("scenario.json");
    std::fs::write(&path, scenario).unwrap();
    let out = run_file(&path, dir.path(), extra);
    (out, dir)
}

fn run_file(path: &Path, out_dir: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoprox"))
        .arg("--scenario")
        .arg(path)
        .arg("--out")
        .arg(out_dir)
        .args(extra)
        .output()
        .unwrap()
}

fn report(dir: &TempDir) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SINGLETONS: &str = r#"{
  "version": 1,
  "space": { "kind": "euclidean", "dim": 2 },
  "sets": {
    "A": { "kind": "explicit", "points": [[0.0, 0.0]] },
    "X": { "kind": "explicit", "points": [[3.0, 4.0]] }
  },
  "command": { "kind": "solve", "a": "A", "x": "X", "mode": "min" }
}"#;

#[test]
fn solve_on_singletons_reports_the_only_pair() {
    let (out, dir) = run(SINGLETONS, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&dir);
    assert_eq!(r["command"], "solve");
    assert_eq!(r["passed"], true);
    let sol = &r["result"]["solution"];
    assert_eq!(sol["a_index"], 0);
    assert_eq!(sol["x_index"], 0);
    assert!((sol["value"].as_f64().unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn fkappa_table_has_zero_width_column_at_zero() {
    let sc = r#"{
      "version": 1,
      "space": { "kind": "euclidean", "dim": 2 },
      "command": { "kind": "fkappa_table", "kappa": [-0.5, -1.0, -2.0],
                   "d": [0.1, 1.0, 2.0], "r": [2.0, 3.0], "sigma": [0.0, 0.05] }
    }"#;
    let (out, dir) = run(sc, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("fkappa.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("kappa,d,r,sigma,f_kappa,f_kappa_zero_width")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3 * 3 * 2 * 2);
    for row in &rows {
        assert!(row[5].abs() <= 1e-9, "{row:?}");
        if row[3] == 0.0 {
            assert_eq!(row[4], row[5]);
        } else {
            assert!(row[4] > 0.0, "{row:?}");
        }
    }
}

#[test]
fn malformed_scenario_exits_one_with_position() {
    let (out, _dir) = run("{\n  \"version\": 1,\n  \"space\": { \"kind\": \"euclidean\", \"dim\": 2 },\n  \"bogus\": 3\n}", &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn wrong_version_and_unknown_set_exit_one() {
    let (out, _dir) = run(&SINGLETONS.replace("\"version\": 1", "\"version\": 2"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("version"));
    let (out, _dir) = run(&SINGLETONS.replace("\"x\": \"X\"", "\"x\": \"Z\""), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown set 'Z'"));
}

#[test]
fn sampled_command_without_seed_exits_one() {
    let sc = r#"{
      "version": 1,
      "space": { "kind": "euclidean", "dim": 2 },
      "command": { "kind": "steckin", "x": [0.0, 0.0], "y": [0.3, 0.0], "r": 1.0, "sigma": 0.05, "samples": 64 }
    }"#;
    let (out, _dir) = run(sc, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("needs a seed"));
    let (out, dir) = run(sc, &["--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report(&dir)["seed"], 3);
}

#[test]
fn violated_precondition_exits_two() {
    let sc = r#"{
      "version": 1,
      "space": { "kind": "euclidean", "dim": 2 },
      "sets": {
        "A": { "kind": "explicit", "points": [[3.0, 0.0]] },
        "X": { "kind": "ball_rings", "radius": 1.0, "rings": 2, "per_ring": 16 }
      },
      "command": { "kind": "regularize_min", "a": "A", "x": "X", "r": 5.0, "p": 10 }
    }"#;
    let (out, dir) = run(sc, &[]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn failed_certification_exits_three_and_still_reports() {
    let path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/tripod_tie_check_fails.json");
    let dir = TempDir::new().unwrap();
    let out = run_file(&path, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let r = report(&dir);
    assert_eq!(r["passed"], false);
    assert_eq!(r["result"]["checks"]["map_singleton"], false);
}

#[test]
fn hyperbolic_points_accept_chart_coordinates() {
    let sc = r#"{
      "version": 1,
      "space": { "kind": "hyperbolic", "kappa": -1.0 },
      "sets": {
        "A": { "kind": "explicit", "points": [[0.0, 0.0]] },
        "X": { "kind": "explicit", "points": [[1.0, 0.0]] }
      },
      "command": { "kind": "solve", "a": "A", "x": "X", "mode": "min" }
    }"#;
    let (out, dir) = run(sc, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&dir);
    assert_eq!(r["result"]["x_point"].as_array().unwrap().len(), 3);
    assert!(r["result"]["solution"]["value"].as_f64().unwrap() > 0.0);
}

const GENERICITY: &str = r#"{
  "version": 1,
  "seed": 9,
  "space": { "kind": "euclidean", "dim": 2 },
  "command": { "kind": "genericity", "config": { "trials": 6 } }
}"#;

#[test]
fn genericity_writes_one_record_per_trial() {
    let (out, dir) = run(GENERICITY, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let trials = std::fs::read_to_string(dir.path().join("trials.jsonl")).unwrap();
    let records: Vec<Value> = trials
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 6);
    let r = report(&dir);
    assert_eq!(r["result"]["root_seed"], 9);
    assert!(r["result"]["summary"].is_object());
}

#[test]
fn thread_count_does_not_change_outputs() {
    let read = |d: &TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    let (a, da) = run(GENERICITY, &["--threads", "1"]);
    let (b, db) = run(GENERICITY, &["--threads", "4"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    assert_eq!(read(&da, "report.json"), read(&db, "report.json"));
    assert_eq!(read(&da, "trials.jsonl"), read(&db, "trials.jsonl"));
}

#[test]
fn zero_threads_is_rejected() {
    let (out, _dir) = run(SINGLETONS, &["--threads", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_all_passes() {
    let sc = r#"{
      "version": 1,
      "seed": 4,
      "space": { "kind": "euclidean", "dim": 2 },
      "command": { "kind": "check_all", "instances": 4 }
    }"#;
    let (out, dir) = run(sc, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let checks = report(&dir)["result"]["checks"].as_array().unwrap().clone();
    assert_eq!(checks.len(), 7);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn profile_command_writes_csv() {
    let sc = SINGLETONS.replace("\"kind\": \"solve\"", "\"kind\": \"profile\"");
    let (out, dir) = run(&sc, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn shipped_scenarios_run() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    assert!(!files.is_empty());
    for path in files {
        let dir = TempDir::new().unwrap();
        let out = run_file(&path, dir.path(), &[]);
        let expected = if path
            .file_name()
            .unwrap()
            .to_string_lossy()
            .contains("fails")
        {
            3
        } else {
            0
        };
        assert_eq!(
            out.status.code(),
            Some(expected),
            "{}: {}",
            path.display(),
            stderr(&out)
        );
        assert!(dir.path().join("report.json").exists());
    }
}
