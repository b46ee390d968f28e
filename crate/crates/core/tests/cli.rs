use std::path::Path;
use std::process::{Command, Output};

fn qbiject(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbiject"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("basic.json");
    let out = qbiject(&[
        "construct",
        "--mode",
        "basic",
        "--depth",
        "21",
        "-o",
        path(&t),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("21 (10 odd, 9 even)"), "{text}");
    let out = qbiject(&["verify", path(&t)]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["summary"]["fail"], 0);
    assert_eq!(report["summary"]["marginal"], 0);
}

#[test]
fn identical_configs_give_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = qbiject(&[
            "construct",
            "--mode",
            "heights",
            "--depth",
            "9",
            "--schedule",
            "scaled:2",
            "-o",
            path(p),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn tampered_trace_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("basic.json");
    assert!(qbiject(&[
        "construct",
        "--mode",
        "basic",
        "--depth",
        "9",
        "-o",
        path(&t)
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&t).unwrap();
    let tampered = text.replacen("\"1729/5184\"", "\"1729/5185\"", 1);
    assert_ne!(text, tampered);
    std::fs::write(&t, tampered).unwrap();
    let out = qbiject(&["verify", path(&t)]);
    assert!(!out.status.success());
}

#[test]
fn wrong_mode_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("basic.json");
    assert!(qbiject(&[
        "construct",
        "--mode",
        "basic",
        "--depth",
        "5",
        "-o",
        path(&t)
    ])
    .status
    .success());
    let out = qbiject(&["verify", path(&t), "--mode", "pila"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_exact_and_enclosure() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("basic.json");
    assert!(qbiject(&[
        "construct",
        "--mode",
        "basic",
        "--depth",
        "9",
        "-o",
        path(&t)
    ])
    .status
    .success());
    let out = qbiject(&["eval", path(&t), "1/3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1729/5184");
    let out = qbiject(&["eval", path(&t), "2/7", "--n", "4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let (lo, hi) = inner.split_once(", ").unwrap();
    let lo: qbiject::Rat = lo.parse().unwrap();
    let hi: qbiject::Rat = hi.parse().unwrap();
    assert_eq!(
        &hi - &lo,
        &qbiject::poly::tail_bound(4) * &qbiject::Rat::int(2)
    );
    let out = qbiject(&["eval", path(&t), "3/2"]);
    assert!(!out.status.success());
}

#[test]
fn export_sorted_by_height() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("basic.json");
    assert!(qbiject(&[
        "construct",
        "--mode",
        "basic",
        "--depth",
        "11",
        "-o",
        path(&t)
    ])
    .status
    .success());
    let out = qbiject(&["export", path(&t), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let xs: Vec<qbiject::UnitRat> = text
        .lines()
        .skip(1)
        .map(|l| qbiject::UnitRat::new(l.split(',').next().unwrap().parse().unwrap()).unwrap())
        .collect();
    assert_eq!(xs.len(), 12);
    assert!(xs
        .windows(2)
        .all(|w| qbiject::lex::lex_cmp(&w[0], &w[1]).is_lt()));
    let out = qbiject(&["export", path(&t), "--format", "json", "--points", "100"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning"));
}

#[test]
fn pila_construct_and_count() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("pila.json");
    let out = qbiject(&[
        "construct",
        "--mode",
        "pila",
        "--stages",
        "2",
        "--slow",
        "2,1",
        "-o",
        path(&t),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    for s in ["stage 0: T = 2", "stage 1: T = 3", "stage 2: T = 5"] {
        assert!(text.contains(s), "{text}");
    }
    let out = qbiject(&["count", path(&t), "5"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "11");
    assert!(!qbiject(&["count", path(&t), "6"]).status.success());
    assert_eq!(qbiject(&["verify", path(&t)]).status.code(), Some(0));
}

#[test]
fn budget_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("h.json");
    let out = Command::new(env!("CARGO_BIN_EXE_qbiject"))
        .args([
            "construct",
            "--mode",
            "heights",
            "--depth",
            "4",
            "--schedule",
            "strict",
            "-o",
            path(&t),
        ])
        .env("QBIJECT_EXPONENT_BUDGET", "1000")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("12444942"));
}

#[test]
fn enumerate_prints_prefix() {
    let out = qbiject(&["enumerate", "--count", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let vals: Vec<&str> = text
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap())
        .collect();
    assert_eq!(vals, ["0/1", "1/1", "1/2", "1/3", "2/3"]);
    let out = qbiject(&["enumerate", "--index-of", "2/3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "4");
}
