use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cpn_core::fixtures::{fig1, fig2};
use cpn_core::{parse_net, serialize_net};
use serde_json::Value;
use tempfile::TempDir;

fn cpn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fig1_file(dir: &TempDir) -> PathBuf {
    let (net, m0) = fig1();
    write(dir, "fig1.json", &serialize_net(&net, &m0).unwrap())
}

fn fig2_file(dir: &TempDir) -> PathBuf {
    let (net, m0) = fig2();
    write(dir, "fig2.json", &serialize_net(&net, &m0).unwrap())
}

#[test]
fn fireable_member_and_non_member() {
    let dir = TempDir::new().unwrap();
    let f1 = fig1_file(&dir);
    let out = cpn(&["fireable", s(&f1), "--subset", "t1,t3"]);
    assert_eq!(code(&out), 0);
    let rec = json(&out);
    assert_eq!(rec["verdict"], true);
    assert_eq!(rec["support"], serde_json::json!(["t1", "t3"]));

    let f2 = fig2_file(&dir);
    let out = cpn(&["fireable", s(&f2), "--subset", "t1,t2"]);
    assert_eq!(code(&out), 1);
    let rec = json(&out);
    assert_eq!(rec["verdict"], false);
    assert_eq!(rec["support"], serde_json::json!([]));
}

#[test]
fn unknown_transition_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let f1 = fig1_file(&dir);
    let out = cpn(&["fireable", s(&f1), "--subset", "t9"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("t9"));
}

#[test]
fn reach_zero_marking_only_in_the_limit() {
    let dir = TempDir::new().unwrap();
    let f1 = fig1_file(&dir);
    let target = write(&dir, "zero.json", "{}");
    let out = cpn(&["reach", s(&f1), "--target", s(&target)]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["mode"], "finite");

    let out = cpn(&["reach", s(&f1), "--target", s(&target), "--limit"]);
    assert_eq!(code(&out), 0);
    let rec = json(&out);
    assert_eq!(rec["verdict"], true);
    assert_eq!(rec["mode"], "limit");
    assert!(rec["parikh"].as_object().is_some_and(|m| !m.is_empty()));
}

#[test]
fn max_yield_both_methods_agree_on_fig1() {
    let dir = TempDir::new().unwrap();
    let f1 = fig1_file(&dir);
    let out = cpn(&["max-yield", s(&f1), "--goal", "p3", "--method", "milp"]);
    assert_eq!(code(&out), 0);
    let rec = json(&out);
    assert_eq!(rec["yield"], "10");
    assert_eq!(rec["support"], serde_json::json!(["t3"]));
    assert_eq!(rec["status"], "optimal");
    assert_eq!(rec["method"], "milp");

    let out = cpn(&[
        "max-yield",
        s(&f1),
        "--goal",
        "p3",
        "--method",
        "binsearch",
        "--epsilon",
        "1/100",
    ]);
    assert_eq!(code(&out), 0);
    let rec = json(&out);
    assert_eq!(rec["yield"], "10");
    assert_eq!(rec["mode"], "finite");
}

#[test]
fn milp_excludes_the_unfireable_support_of_fig2() {
    let dir = TempDir::new().unwrap();
    let f2 = fig2_file(&dir);
    let out = cpn(&["max-yield", s(&f2), "--goal", "pg", "--method", "milp"]);
    assert_eq!(code(&out), 0);
    let rec = json(&out);
    assert_eq!(rec["yield"], "0");
    assert_eq!(rec["queries_or_cuts"], 1);

    let out = cpn(&["max-yield", s(&f2), "--goal", "pg", "--method", "milp", "--cap", "1"]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["status"], "budget_exhausted");
}

#[test]
fn n_best_lists_non_increasing_yields() {
    let dir = TempDir::new().unwrap();
    let f1 = fig1_file(&dir);
    let out = cpn(&["max-yield", s(&f1), "--goal", "p3", "--method", "milp", "--n-best", "3"]);
    assert_eq!(code(&out), 0);
    let recs = json(&out);
    let recs = recs.as_array().expect("array of records");
    assert!(!recs.is_empty() && recs.len() <= 3);
    let yields: Vec<cpn_core::Rational> = recs
        .iter()
        .map(|r| r["yield"].as_str().unwrap().parse().unwrap())
        .collect();
    assert!(yields.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(recs[0]["support"], serde_json::json!(["t3"]));
}

#[test]
fn max_yield_rejects_inconsistent_flags() {
    let dir = TempDir::new().unwrap();
    let f1 = fig1_file(&dir);
    let base = ["max-yield", s(&f1), "--goal", "p3", "--method"];
    let with = |extra: &[&str]| {
        let mut args = base.to_vec();
        args.extend_from_slice(extra);
        cpn(&args)
    };
    assert_eq!(code(&with(&["binsearch", "--n-best", "2"])), 2);
    assert_eq!(code(&with(&["milp", "--epsilon", "1/10"])), 2);
    assert_eq!(code(&with(&["milp", "--limit", "--finite"])), 2);
    assert_eq!(code(&with(&["binsearch", "--epsilon", "0"])), 2);
    assert_eq!(code(&with(&["binsearch", "--epsilon", "1/0"])), 2);
    let out = cpn(&["max-yield", s(&f1), "--goal", "nope", "--method", "milp"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn check_witness_verdicts() {
    let dir = TempDir::new().unwrap();
    let f1 = fig1_file(&dir);
    let target = write(&dir, "target.json", r#"{"p3": "10"}"#);
    let good = write(&dir, "good.json", r#"{"t3": "1"}"#);
    let bad = write(&dir, "bad.json", r#"{"t3": "2"}"#);
    let out = cpn(&["check-witness", s(&f1), "--target", s(&target), "--parikh", s(&good)]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], true);
    let out = cpn(&["check-witness", s(&f1), "--target", s(&target), "--parikh", s(&bad)]);
    assert_eq!(code(&out), 1);

    let less = write(&dir, "less.json", r#"{"p3": "5"}"#);
    let out = cpn(&["check-witness", s(&f1), "--target", s(&less), "--parikh", s(&good)]);
    assert_eq!(code(&out), 1);
    let out = cpn(&[
        "check-witness",
        s(&f1),
        "--target",
        s(&less),
        "--parikh",
        s(&good),
        "--at-least",
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn gen_lattice_is_deterministic_and_parses() {
    let args = [
        "gen",
        "lattice",
        "--rows",
        "3",
        "--cols",
        "4",
        "--seed",
        "11",
        "--fraction",
        "1/4",
    ];
    let a = cpn(&args);
    let b = cpn(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let (net, m0) = parse_net(&text).unwrap();
    assert_eq!(net.num_places(), 12);
    assert_eq!(net.num_transitions(), 3 * 3 + 2 * 4);
    assert_eq!(m0.support().len(), 3);
    let header: Value = serde_json::from_str(&text).unwrap();
    let generator = header["header"]["generator"].as_str().unwrap();
    assert!(generator.contains("chacha8 seed=11"), "{generator}");
    assert!(generator.contains("goal=n"), "{generator}");
}

#[test]
fn bench_writes_csv() {
    let dir = TempDir::new().unwrap();
    let f1 = fig1_file(&dir);
    let config = write(
        &dir,
        "bench.toml",
        &format!(
            r#"
repetitions = 2
seed = 5

[[instances]]
kind = "lattice"
rows = 3
cols = 3

[[instances]]
kind = "file"
path = "{}"
goal = "p3"
"#,
            f1.file_name().unwrap().to_str().unwrap()
        ),
    );
    let out = cpn(&["bench", "--config", s(&config)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("instance,algorithm,rows,cols"));
    assert!(lines[1].starts_with("3x3,binsearch,3,3,1/10,2,"));
    assert!(lines[4].starts_with("fig1,milp,,,"));
}

#[test]
fn malformed_inputs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "broken.json", "{\n  \"header\": {\n");
    let out = cpn(&["fireable", s(&broken), "--subset", "t1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&cpn(&["fireable", s(&missing)])), 2);

    let config = write(&dir, "bad.toml", "repetitions = \"many\"\n");
    let out = cpn(&["bench", "--config", s(&config)]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&cpn(&["frobnicate"])), 2);
}
