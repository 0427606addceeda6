use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn corrclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrclust"))
        .args(args)
        .env("CORRCLUST_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const G3: &str = "n 3\n0 1 + 1\n1 2 + 1\n0 2 - 1\n";

#[test]
fn solve_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g3.txt", G3);
    let v = json(&corrclust(&["solve", "--input", &g, "--q", "1"]));
    assert_eq!(v["schema"], 1);
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(v["lower_bound"].as_f64().unwrap() <= 2.0 + 1e-7);
}

#[test]
fn q_below_one_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g3.txt", G3);
    let out = corrclust(&["solve", "--input", &g, "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_edge_infinity() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "e.txt", "n 2\n0 1 + 1\n");
    let v = json(&corrclust(&["solve", "--input", &g, "--q", "inf"]));
    assert_eq!(v["q"], "inf");
    assert!(v["value"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn missing_file_and_bad_graph_fail() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    assert_eq!(
        corrclust(&["solve", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    let bad = write(dir.path(), "bad.txt", "n 2\n0 0 + 1\n");
    let out = corrclust(&["solve", "--input", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn rounding_modes_reject_unsupported_instances() {
    let dir = tempfile::tempdir().unwrap();
    let weighted = write(dir.path(), "w.txt", "n 3\n0 1 + 2\n1 2 + 1\n0 2 - 1\n");
    assert_ne!(
        corrclust(&["round", "--input", &weighted, "--mode", "complete"])
            .status
            .code(),
        Some(0)
    );
    let g = write(dir.path(), "g3.txt", G3);
    assert_ne!(
        corrclust(&["round", "--input", &g, "--mode", "bipartite"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn general_rounding_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let gen = corrclust(&[
        "gen", "--kind", "weighted", "--n", "10", "--p-edge", "0.6", "--seed", "4",
    ]);
    assert!(gen.status.success());
    let g = write(
        dir.path(),
        "w.txt",
        std::str::from_utf8(&gen.stdout).unwrap(),
    );
    let args = [
        "round", "--input", &g, "--q", "2", "--seed", "11", "--trials", "3",
    ];
    let a = corrclust(&args);
    let b = corrclust(&args);
    let v = json(&a);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(v["trials"].as_array().unwrap().len(), 3);
    assert_eq!(v["passed"], true);
}

#[test]
fn solution_dump_feeds_round() {
    let dir = tempfile::tempdir().unwrap();
    let gen = corrclust(&["gen", "--kind", "random", "--n", "6", "--seed", "2"]);
    let g = write(
        dir.path(),
        "c.txt",
        std::str::from_utf8(&gen.stdout).unwrap(),
    );
    let sol = dir.path().join("sol.json");
    let out = corrclust(&[
        "solve",
        "--input",
        &g,
        "--q",
        "2",
        "--output",
        sol.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json(&corrclust(&[
        "round",
        "--input",
        &g,
        "--q",
        "2",
        "--mode",
        "complete",
        "--solution",
        sol.to_str().unwrap(),
    ]));
    assert_eq!(v["passed"], true);
    assert!(v["trials"][0]["audit"]["min_profit"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn gap_instance_value() {
    let v = json(&corrclust(&[
        "gap",
        "--a",
        "3",
        "--b",
        "3",
        "--q",
        "2",
        "--no-oracle",
    ]));
    assert_eq!(v["lp_formula_value"].as_f64().unwrap(), 2.0);
    assert_eq!(v["feasibility_violations"], 0);
    assert_eq!(v["passed"], true);
}

#[test]
fn reduce_decides_small_formulas() {
    let dir = tempfile::tempdir().unwrap();
    for (text, cut) in [("p cnf 1 1\n1 0\n", 1.0), ("p cnf 1 2\n1 0\n-1 0\n", 2.0)] {
        let f = write(dir.path(), "f.cnf", text);
        let report = dir.path().join("r.json");
        let out = corrclust(&[
            "reduce",
            "--input",
            &f,
            "--verify",
            "--report",
            report.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        let (n, m) = (
            v["num_vars"].as_u64().unwrap(),
            v["num_clauses"].as_u64().unwrap(),
        );
        assert_eq!(v["vertices"].as_u64().unwrap(), 2 + 4 * n + 5 * m);
        assert_eq!(v["edges"].as_u64().unwrap(), 6 * n + 8 * m);
        assert_eq!(v["verify"]["cut_value"].as_f64().unwrap(), cut);
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("n "));
    }
}

#[test]
fn exact_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g3.txt", G3);
    let v = json(&corrclust(&["exact", "--input", &g, "--q", "inf"]));
    assert_eq!(v["value"].as_f64().unwrap(), 1.0);
    let enumerated = v["enumerated"].as_u64().unwrap();
    assert!((1..=5).contains(&enumerated));
}

#[test]
fn generator_is_seeded() {
    let a = corrclust(&[
        "gen",
        "--kind",
        "bipartite",
        "--left",
        "3",
        "--right",
        "4",
        "--seed",
        "9",
    ]);
    let b = corrclust(&[
        "gen",
        "--kind",
        "bipartite",
        "--left",
        "3",
        "--right",
        "4",
        "--seed",
        "9",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("n 7 bipartite 3"));
}

#[test]
fn verify_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let gen = corrclust(&[
        "gen",
        "--kind",
        "bipartite",
        "--left",
        "3",
        "--right",
        "3",
        "--seed",
        "1",
    ]);
    let g = write(
        dir.path(),
        "b.txt",
        std::str::from_utf8(&gen.stdout).unwrap(),
    );
    let v = json(&corrclust(&["verify", "--input", &g, "--q", "2"]));
    assert_eq!(v["mode"], "bipartite");
    assert_eq!(v["passed"], true);
}
