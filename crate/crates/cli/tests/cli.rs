use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ctp_core::gadgets::baiting_harness;
use ctp_core::model::json::to_json_string;
use ctp_core::{q, InstanceBuilder};
use tempfile::TempDir;

fn ctp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TRUE_QBF: &str = "p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n";
const FALSE_QBF: &str = "p cnf 2 1\na 1 0\ne 2 0\n1 0\n";

fn sure_toy(dir: &TempDir) -> PathBuf {
    let mut b = InstanceBuilder::new();
    let s = b.add_vertex("s");
    let t = b.add_vertex("t");
    b.add_sure("st", s, t, q(5, 1));
    b.set_source(s);
    b.set_target(t);
    file(dir, "toy.json", &to_json_string(&b.build().unwrap()))
}

fn harness(dir: &TempDir) -> PathBuf {
    file(
        dir,
        "harness.json",
        &to_json_string(&baiting_harness(&q(2, 1)).unwrap()),
    )
}

#[test]
fn qbf_decides_both_ways() {
    let dir = TempDir::new().unwrap();
    let sat = ctp(&["qbf", s(&file(&dir, "t.qdimacs", TRUE_QBF))]);
    assert!(sat.status.success());
    assert_eq!(stdout(&sat).trim(), "SAT");
    let unsat = ctp(&["qbf", s(&file(&dir, "f.qdimacs", FALSE_QBF))]);
    assert_eq!(stdout(&unsat).trim(), "UNSAT");
}

#[test]
fn long_clause_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let f = file(
        &dir,
        "long.qdimacs",
        "p cnf 4 1\na 1 0\ne 2 0\na 3 0\ne 4 0\n1 2 3 4 0\n",
    );
    let out = ctp(&["qbf", s(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("clause exceeds 3 literals"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn missing_input_exits_2() {
    let out = ctp(&["qbf", "/nonexistent/formula.qdimacs"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn reduce_ctpdep_writes_instance_and_certificate() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "t.qdimacs", TRUE_QBF);
    let out_path = dir.path().join("dep.json");
    let out = ctp(&["reduce", "ctpdep", s(&input), "-o", s(&out_path)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("h = 1/8"), "{}", stdout(&out));
    assert!(out_path.exists());
    assert!(dir.path().join("dep.cert.json").exists());
    let solved = ctp(&["solve", s(&out_path)]);
    assert!(solved.status.success());
    assert!(
        stdout(&solved).starts_with("0/1 (0.0), Move(s,v1)"),
        "{}",
        stdout(&solved)
    );
}

#[test]
fn reduce_ctp_reports_the_bounds_violation() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "t.qdimacs", "p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n");
    let out_path = dir.path().join("ctp.json");
    let out = ctp(&["reduce", "ctp", s(&input), "-o", s(&out_path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bounds violated"));
    let cert = fs::read_to_string(dir.path().join("ctp.cert.json")).unwrap();
    assert!(cert.contains("\"l\""), "{cert}");
    assert!(out_path.exists());
}

#[test]
fn reduce_sensing_on_a_named_graph() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("vc.json");
    let out = ctp(&["reduce", "sensing", "p3", "-o", s(&out_path)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("epsilon = "));
}

#[test]
fn solve_sure_toy() {
    let dir = TempDir::new().unwrap();
    let out = ctp(&["solve", s(&sure_toy(&dir))]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "5/1 (5.0), Move(s,t)");
}

#[test]
fn solve_evaluates_a_reference_policy() {
    let dir = TempDir::new().unwrap();
    let out = ctp(&["solve", s(&harness(&dir)), "--policy", "baiting_pi"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("263/512"), "{}", stdout(&out));
}

#[test]
fn solve_tree_round_trips_as_policy() {
    let dir = TempDir::new().unwrap();
    let inst = harness(&dir);
    let tree = dir.path().join("tree.json");
    assert!(ctp(&["solve", s(&inst), "--tree", s(&tree)])
        .status
        .success());
    let out = ctp(&["solve", s(&inst), "--policy", s(&tree)]);
    assert!(stdout(&out).starts_with("263/512"), "{}", stdout(&out));
}

#[test]
fn tiny_cap_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = ctp(&["solve", s(&harness(&dir)), "--cap", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dot_export_labels_edges() {
    let dir = TempDir::new().unwrap();
    let out = ctp(&["export-dot", s(&sure_toy(&dir))]);
    let text = stdout(&out);
    assert!(text.starts_with("graph ctp {"));
    assert!(text.contains("label=\"5|0\""), "{text}");
    let gadget = stdout(&ctp(&["export-dot", s(&harness(&dir))]));
    let dashed = gadget
        .lines()
        .filter(|l| l.contains("style=dashed"))
        .count();
    assert_eq!(dashed, 7);
    assert_eq!(gadget.matches("label=\"0|1/2\"").count(), 7);
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let ok = ctp(&[
        "verify",
        "gadgets",
        "--trials",
        "2000",
        "--json",
        s(&report),
    ]);
    assert!(ok.status.success(), "{}", stdout(&ok));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["status"], "pass");
    let bad = ctp(&["verify", "ctp-cert", "--n", "2", "--m", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL B0 < h < B1"));
}
