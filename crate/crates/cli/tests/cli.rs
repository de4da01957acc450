use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_concsynth")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_prints_a_definition() {
    let o = run(&["solve", corpus("ssi/fg_max2.sl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("(define-fun max2 ((x1 Int) (x2 Int)) Int"), "{out}");
    let (name, params, _) = concsynth::sygus::parse_define_fun(out.trim()).unwrap();
    assert_eq!((name.as_str(), params.len()), ("max2", 2));
}

#[test]
fn unsynthesizable_exits_zero_with_status() {
    let o = run(&["solve", corpus("ssi_comm/comm_unsat.sl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "nosolution");
    assert!(String::from_utf8_lossy(&o.stderr).contains("no function exists"));
}

#[test]
fn stats_record_concolic_heights() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.json");
    let o = run(&[
        "solve",
        "--engine",
        "concolic",
        "--stats",
        stats.to_str().unwrap(),
        corpus("ssi/fg_max2.sl").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_reader(std::fs::File::open(&stats).unwrap()).unwrap();
    assert_eq!(v["record"]["status"], "Solved");
    assert_eq!(v["record"]["verified"], true);
    let heights = v["outcome"]["concolic"]["heights"].as_array().unwrap();
    assert_eq!(heights[0], serde_json::json!([1, "no-solution"]));
    assert_eq!(heights[1], serde_json::json!([2, "found"]));
}

#[test]
fn dumps_graph_and_candidates() {
    let o = run(&["solve", "--dump-graph", corpus("at/counter.sl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("digraph transitions {"));
    assert!(stdout(&o).contains("b0 -> b1;"));

    let o = run(&["solve", "--dump-candidates", corpus("ssi/fg_max2.sl").to_str().unwrap()]);
    assert!(stdout(&o).starts_with("; candidates: x1, x2, 0"), "{}", stdout(&o));
}

#[test]
fn forced_engine_reports_unsupported_problem() {
    let o = run(&["solve", "--engine", "at", corpus("ssi/fg_max2.sl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).trim(), "error");
}

#[test]
fn missing_file_is_an_error() {
    let o = run(&["solve", "/nonexistent/problem.sl"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tiny_timeout_exits_one() {
    let o = run(&["solve", "--engine", "concolic", "--timeout", "0.05", corpus("ssi/fg_max4.sl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "timeout");
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["ssi/fg_max2.sl", "ssi_comm/comm_unsat.sl", "at/counter.sl"] {
        let to = dir.path().join(name.replace('/', "_"));
        std::fs::copy(corpus(name), to).unwrap();
    }
    let csv = dir.path().join("out.csv");
    let o = run(&["bench", dir.path().to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path,category,engine,status,ms,verified"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let status: Vec<(&str, &str)> = rows.iter().map(|r| (r[2], r[3])).collect();
    assert_eq!(status, vec![("at", "Solved"), ("ssi", "NoSolution"), ("ssi", "Solved")]);
    assert!(rows.iter().all(|r| r[5] == "true"));
}
