use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kappa(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kappa"))
        .args(args)
        .arg("--cache-dir")
        .arg(cache)
        .env_remove("KAPPA_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .trim_end()
        .to_string()
}

#[test]
fn rank_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = kappa(
        dir.path(),
        &["rank", "--g", "1", "--n", "6", "--d", "3", "--json"],
    );
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        r#"{"d":3,"g":1,"n":6,"rank":3,"formula":3,"agrees":true}"#
    );
}

#[test]
fn rank_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = kappa(
        dir.path(),
        &["rank", "--g", "0", "--n", "5", "--d", "2", "--csv"],
    );
    assert_eq!(stdout(&o), "d,g,n,rank,formula,agrees\n2,0,5,1,1,true");
}

#[test]
fn pair_text() {
    let dir = tempfile::tempdir().unwrap();
    let o = kappa(
        dir.path(),
        &["pair", "--g", "1", "--n", "2", "--psi", "1", "--q", "(0,4)"],
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1");
    let o = kappa(
        dir.path(),
        &[
            "pair",
            "--g",
            "1",
            "--n",
            "2",
            "--psi",
            "1",
            "--q",
            "(1,1)|(0,3)",
            "--json",
        ],
    );
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], "1/24");
}

#[test]
fn intersect_and_cache_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = kappa(dir.path(), &["intersect", "--g", "0", "--exps", "0,0,0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1");
    let o = kappa(
        dir.path(),
        &["intersect", "--g", "2", "--exps", "4", "--json"],
    );
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], "1/1152");
    let cached = std::fs::read_to_string(dir.path().join("tau.cache")).unwrap();
    assert!(cached.lines().any(|l| l == "2|4|1/1152"));
    // a warm start gives the same answer
    let o = kappa(dir.path(), &["intersect", "--g", "2", "--exps", "4"]);
    assert_eq!(stdout(&o), "1/1152");
}

#[test]
fn expand_text() {
    let dir = tempfile::tempdir().unwrap();
    let o = kappa(
        dir.path(),
        &["expand", "--g", "1", "--n", "2", "--psi", "1,1"],
    );
    assert_eq!(stdout(&o), "1*k1^2 + 1*k2");
    let o = kappa(
        dir.path(),
        &[
            "expand", "--g", "1", "--n", "2", "--psi", "1", "--basis", "bracket", "--d", "0",
        ],
    );
    assert_eq!(stdout(&o), "2");
}

#[test]
fn enumerate_lists() {
    let dir = tempfile::tempdir().unwrap();
    let o = kappa(
        dir.path(),
        &["enumerate", "--d", "1", "--g", "1", "--n", "2", "--json"],
    );
    assert_eq!(stdout(&o), r#"["(0,4)","(1,1)|(0,3)"]"#);
    let o = kappa(dir.path(), &["enumerate", "--d", "4"]);
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = kappa(
        dir.path(),
        &[
            "--json",
            "verify",
            "--suite",
            "genus1-rank",
            "--max-d",
            "3",
            "--max-n",
            "5",
        ],
    );
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cases = v.as_array().unwrap();
    assert!(!cases.is_empty());
    assert!(cases.iter().all(|c| c["pass"] == true));

    let o = kappa(dir.path(), &["verify", "--suite", "bases", "--max-d", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert!(last.ends_with("cases passed"), "{last}");
    assert!(text.lines().rev().skip(1).all(|l| l.starts_with("PASS ")));
}

#[test]
fn asymptotic_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = kappa(
        dir.path(),
        &["asymptotic", "--g", "0", "--e", "2", "--n", "10"],
    );
    assert_eq!(stdout(&o), "11");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // usage errors
    assert_eq!(
        kappa(dir.path(), &["rank", "--g", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        kappa(
            dir.path(),
            &["pair", "--g", "1", "--n", "2", "--psi", "x", "--q", "(0,4)"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(kappa(dir.path(), &["frobnicate"]).status.code(), Some(2));
    // domain errors name the violated condition
    let o = kappa(dir.path(), &["rank", "--g", "3", "--n", "1", "--d", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("genus 3"));
    let o = kappa(dir.path(), &["intersect", "--g", "0", "--exps", "0,0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = kappa(dir.path(), &["verify", "--suite", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["enumerate", "--d", "2", "--g", "2", "--n", "2", "--csv"];
    assert_eq!(
        stdout(&kappa(dir.path(), &args)),
        stdout(&kappa(dir.path(), &args))
    );
}
