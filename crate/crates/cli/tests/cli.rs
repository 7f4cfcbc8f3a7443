use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/corpus")
}

fn problem(id: &str) -> PathBuf {
    corpus().join(format!("{id}.json"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_georeason")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    let (code, stdout, _) = run(&["solve", p(&problem("angle_02")), "--method", "mcts", "--out", p(&out)]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout);
    let result: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(result["solved"], true);
    let seq = dir.path().join("seq.json");
    std::fs::write(&seq, result["sequence"].to_string()).unwrap();
    let (code, stdout, _) = run(&["verify", p(&problem("angle_02")), p(&seq)]);
    assert_eq!(code, 0, "{stdout}");
}

#[test]
fn unsolvable_fixture_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cdl = dir.path().join("stuck.cdl");
    std::fs::write(&cdl, "Points A,B,C,D; Polygon(A,B,C); Equal(MeasureOfAngle(A,B,C),40); Goal Value(LengthOfLine(A,D))").unwrap();
    for method in ["mcts", "fw-bfs", "bw-dfs"] {
        let (code, stdout, _) = run(&["solve", p(&cdl), "--method", method, "--iterations", "10", "--max-nodes", "50"]);
        assert_eq!(code, 1, "{method}");
        let v: Value = serde_json::from_str(&stdout).unwrap();
        assert_eq!(v["problem_id"], "stuck");
        assert_eq!(v["solved"], false);
    }
}

#[test]
fn missing_schema_file_exits_two() {
    let (code, _, stderr) = run(&["solve", p(&problem("angle_01")), "--gdl", "/nonexistent/geometry.gdl"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("error"));
    let (code, _, _) = run(&["solve", p(&problem("angle_01")), "--method", "nope"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_cases() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("trace.dot");
    let (code, stdout, _) = run(&["verify", p(&problem("angle_05")), "--dot", p(&dot)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!((v["solved"].clone(), v["first_failure"].clone()), (Value::Bool(true), Value::Null));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"[{"theorem":"triangle_property_angle_sum","branch":1},{"theorem":"triangle_property_angle_sum","branch":7}]"#).unwrap();
    let (code, stdout, _) = run(&["verify", p(&problem("angle_05")), p(&bad)]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["first_failure"], 1);

    let solved = dir.path().join("solved.cdl");
    std::fs::write(&solved, "Points A,B,C,D; Parallel(C,D,A,B); Goal Parallel(A,B,C,D)").unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    assert_eq!(run(&["verify", p(&solved), p(&empty)]).0, 0);
}

#[test]
fn train_writes_lineage_and_repeats() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let (code, _, stderr) = run(&["train", "--corpus", p(&corpus()), "--out", p(d.path()), "--generations", "1", "--seed", "3"]);
        assert_eq!(code, 0, "{stderr}");
        assert!(d.path().join("model_v1.json").exists());
        assert!(d.path().join("model_v2.json").exists());
    }
    for name in ["metrics.json", "model_v1.json", "model_v2.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
}

#[test]
fn train_without_annotations_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    for id in ["angle_01", "angle_02", "length_01", "area_01"] {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(problem(id)).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("annotated_sequence");
        std::fs::write(dir.path().join(format!("{id}.json")), v.to_string()).unwrap();
    }
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run(&["train", "--corpus", p(dir.path()), "--out", p(out.path())]).0, 2);
}

#[test]
fn eval_table() {
    let (code, stdout, _) = run(&["eval", "--corpus", p(&corpus())]);
    assert_eq!(code, 0);
    let header: Vec<&str> = stdout.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["Range", "1", "3", "5", "10", "15", "20", "25"]);

    let actions = georeason::lang::parse_gdl(georeason::GEOMETRY_GDL).unwrap().actions().len();
    let (code, stdout, _) = run(&["eval", "--corpus", p(&corpus()), "--k", &actions.to_string()]);
    assert_eq!(code, 0);
    assert!(stdout.lines().nth(1).unwrap().contains("100.00"));
    assert_eq!(run(&["eval", "--corpus", p(&corpus()), "--k", &(actions + 1).to_string()]).0, 2);

    let tiny = tempfile::tempdir().unwrap();
    std::fs::copy(problem("angle_01"), tiny.path().join("angle_01.json")).unwrap();
    assert_eq!(run(&["eval", "--corpus", p(tiny.path())]).0, 2);
}

#[test]
fn bench_tables() {
    let one = tempfile::tempdir().unwrap();
    std::fs::copy(problem("angle_01"), one.path().join("angle_01.json")).unwrap();
    let out = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(&["bench", "--corpus", p(one.path()), "--methods", "fw-bfs", "--out", p(out.path())]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split_whitespace().count(), 8);
    assert!(out.path().join("bench.json").exists() && out.path().join("bench.txt").exists());

    let (code, stdout, _) = run(&["bench", "--corpus", p(&corpus()), "--timeout", "0"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.split_whitespace().nth(1) == Some("0.00")));
}

#[test]
fn stats_table_and_json() {
    let (code, stdout, _) = run(&["stats", "--corpus", p(&corpus())]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("Category"));
    let (code, stdout, _) = run(&["stats", "--corpus", p(&corpus()), "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["total"].as_u64().unwrap() >= 40);
}

#[test]
fn config_file_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# tree search only\nrollout_solutions = false\niterations = 3\n").unwrap();
    let (_, stdout, _) = run(&["solve", p(&problem("perimeter_07")), "--config", p(&cfg)]);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["config"]["rollout_solutions"], false);
    assert!(v["iterations"].as_u64().unwrap() <= 3);
}
