//! The command-line surface: outputs, exit codes, bundles.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn rrealize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrealize"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// The report without its timestamp line.
fn body(o: &Output) -> String {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with("# rrealize report"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn ord_normalizes() {
    let o = rrealize(&["ord", "w*2 + 3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "w*2+3");
}

#[test]
fn fixture_realizer_checks() {
    let f = fixture("true_atomic.fml");
    let r = fixture("empty.rlz");
    let o = rrealize(&[
        "realize",
        "check",
        "--formula",
        f.to_str().unwrap(),
        "--realizer",
        r.to_str().unwrap(),
        "--universe-rank",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict = realized"));
}

#[test]
fn fixture_recognizer_recognizes() {
    let p = fixture("eq.otm");
    let pool = fixture("pool.txt");
    let o = rrealize(&[
        "rec",
        "test",
        "--program",
        p.to_str().unwrap(),
        "--param",
        "{2}",
        "--pool",
        pool.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().last(), Some("recognizes {2}"));
    let o = rrealize(&[
        "rec",
        "test",
        "--program",
        p.to_str().unwrap(),
        "--param",
        "{5}",
        "--pool",
        pool.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn exit_codes_follow_the_verdict() {
    let dir = std::env::temp_dir().join(format!("rrealize-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let false_atomic = dir.join("false.fml");
    std::fs::write(&false_atomic, "{} in {}\n").unwrap();
    let r = fixture("empty.rlz");
    let o = rrealize(&[
        "realize",
        "check",
        "--formula",
        false_atomic.to_str().unwrap(),
        "--realizer",
        r.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("verdict = refuted"));
    // Omega is not hereditarily finite: the verdict stays open.
    assert_eq!(code(&rrealize(&["kp", "emit", "infinity"])), 2);
    assert_eq!(code(&rrealize(&["ord", "w*"])), 3);
    assert_eq!(
        code(&rrealize(&[
            "realize",
            "check",
            "--realizer",
            r.to_str().unwrap()
        ])),
        3
    );
    assert_eq!(code(&rrealize(&["no-such-command"])), 3);
    assert_eq!(code(&rrealize(&["--help"])), 0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reports_are_deterministic_and_carry_the_manifest() {
    let args = [
        "kp",
        "emit",
        "union",
        "--x",
        "{{{}},{{{}}}}",
        "--universe-rank",
        "2",
    ];
    let (a, b) = (rrealize(&args), rrealize(&args));
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    assert_eq!(body(&a), body(&b));
    let text = stdout(&a);
    assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 1);
    for key in [
        "command = kp emit",
        "universe-rank = 2",
        "fuel = 1000000",
        "verdict = realized",
        "witness-set = {{},{{}}}",
    ] {
        assert!(text.contains(key), "missing `{key}` in\n{text}");
    }
}

#[test]
fn json_reports_parse() {
    let o = rrealize(&["--json", "code", "encode", "{{}}"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).expect("valid JSON");
    assert_eq!(v["manifest"]["command"], "code encode");
    assert_eq!(v["manifest"]["universe_rank"], 3);
    assert_eq!(v["result"]["set"], "{{}}");
}

#[test]
fn kp_bundle_reverifies() {
    let dir = std::env::temp_dir().join(format!("rrealize-bundle-{}", std::process::id()));
    let o = rrealize(&[
        "kp",
        "emit",
        "pairing",
        "--x",
        "{}",
        "--y",
        "{{}}",
        "--universe-rank",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let manifest = std::fs::read_to_string(dir.join("verify.manifest")).unwrap();
    let commands: Vec<&str> = manifest
        .lines()
        .filter(|l| l.starts_with("rrealize "))
        .collect();
    assert_eq!(commands.len(), 3);
    // The first line re-checks the realizer from the bundle's files.
    let o = Command::new(env!("CARGO_BIN_EXE_rrealize"))
        .current_dir(&dir)
        .args([
            "realize",
            "check",
            "--formula",
            "formula.fml",
            "--realizer",
            "realizer.rlz",
            "--pool",
            "pool.txt",
            "--universe-rank",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn proofs_check_and_extract() {
    let dir = std::env::temp_dir().join(format!("rrealize-proof-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let proof = dir.join("mp.prf");
    std::fs::write(
        &proof,
        "premise {} = {}\npremise {} = {} -> {} in {{}}\nmp 1 2\n",
    )
    .unwrap();
    let p1 = dir.join("a.prem");
    std::fs::write(&p1, "formula {} = {}\nempty\n").unwrap();
    let p2 = dir.join("b.prem");
    std::fs::write(
        &p2,
        "formula {} = {} -> {} in {{}}\ncanonical {} = {} -> {} in {{}}\n",
    )
    .unwrap();
    let o = rrealize(&["proof", "check", proof.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("result = valid"));
    let o = rrealize(&[
        "proof",
        "extract",
        proof.to_str().unwrap(),
        "--premises",
        p1.to_str().unwrap(),
        p2.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict = realized"));
    std::fs::write(&proof, "premise {} = {}\nmp 1 1\n").unwrap();
    assert_eq!(
        code(&rrealize(&["proof", "check", proof.to_str().unwrap()])),
        1
    );
    std::fs::remove_dir_all(&dir).ok();
}
