use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hypb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypb"))
        .current_dir(dir)
        .env_remove("HYPB_SEED")
        .args(args)
        .output()
        .expect("spawn hypb")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(path: impl AsRef<Path>) -> Value {
    serde_json::from_slice(&std::fs::read(path).expect("read json")).expect("parse json")
}

#[test]
fn identity_run_writes_rerunnable_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = hypb(dir.path(), &["identity", "bougerol", "--t", "1", "--n", "20000", "--out", "a"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = read(dir.path().join("a/identity-bougerol-seed42.json"));
    assert_eq!(first["pass"], true);

    let config = dir.path().join("a/identity-bougerol-seed42.config.json");
    let o = hypb(dir.path(), &["identity", "bougerol", "--config", config.to_str().unwrap(), "--out", "b"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let second = read(dir.path().join("b/identity-bougerol-seed42.json"));
    for key in ["pass", "result"] {
        assert_eq!(second[key], first[key]);
    }
    assert_eq!(second["config"]["params"], first["config"]["params"]);

    let o = hypb(dir.path(), &["identity", "bougerol", "--t", "1", "--n", "20000", "--parallel", "--out", "c"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(dir.path().join("c/identity-bougerol-seed42.json"))["result"], first["result"]);
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_hypb"));
        c.current_dir(dir.path()).env_remove("HYPB_SEED");
        if let Some(s) = env {
            c.env("HYPB_SEED", s);
        }
        let args = [&["laplace", "--alpha", "0", "--x", "1", "--t", "0.5", "--lambda", "1", "--methods", "gbm,j0", "--n", "2000", "--steps-per-unit", "64"], extra].concat();
        code(&c.args(args).output().unwrap())
    };
    assert_eq!(run(Some("7"), &[]), 0);
    assert_eq!(run(Some("7"), &["--seed", "9"]), 0);
    assert_eq!(run(None, &[]), 0);
    for seed in [7, 9, 42] {
        assert!(dir.path().join(format!("hypb-out/laplace-seed{seed}.json")).exists(), "seed {seed}");
    }
    assert_eq!(run(Some("not-a-seed"), &[]), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hypb(dir.path(), &["identity", "nonsense"])), 2);
    assert_eq!(code(&hypb(dir.path(), &["laplace", "--alpha", "0", "--x", "0", "--t", "1", "--lambda", "-1", "--methods", "gbm"])), 2);
    let numeric = hypb(dir.path(), &["laplace", "--alpha", "-0.5", "--x", "0", "--t", "10", "--lambda", "1", "--methods", "quadrature", "--out", "o"]);
    assert_eq!(code(&numeric), 3, "{}", String::from_utf8_lossy(&numeric.stderr));
    // the three-Brownian-motion closed form as printed is rejected
    let rejected = hypb(dir.path(), &["identity", "sinh-displayed", "--x", "1", "--t", "1", "--n", "20000", "--out", "o"]);
    assert_eq!(code(&rejected), 4);
    assert_eq!(read(dir.path().join("o/identity-sinh-displayed-seed42.json"))["pass"], false);
}

#[test]
fn acceptance_subcommand_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["acceptance", "--n", "2000", "--steps-per-unit", "64", "--determinism-n", "300", "--negative-controls", "--out", "o"];
    let o = hypb(dir.path(), &args);
    // criterion 13 is red at every budget
    assert_eq!(code(&o), 4);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<_> = stdout.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(lines.len(), 17, "{stdout}");
    assert!(lines.iter().any(|l| l.starts_with("FAIL 13")));

    let report = read(dir.path().join("o/acceptance-seed42.json"));
    let criteria = report["result"]["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 15);
    assert_eq!(report["result"]["controls"].as_array().unwrap().len(), 2);
}
