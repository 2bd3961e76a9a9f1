//! Fixture-driven regression tests: every shipped fixture's expected
//! report is byte-diffed against a fresh run of the binary.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mittag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn expected(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("expected report exists")
}

fn assert_report(args: &[&str], expect_file: &str, expect_code: i32) {
    let out = run(args);
    let stdout = String::from_utf8(out.stdout).expect("UTF-8 report");
    let want = expected(expect_file);
    assert_eq!(
        stdout, want,
        "report for {args:?} diverged from {expect_file}"
    );
    assert_eq!(
        out.status.code(),
        Some(expect_code),
        "exit code for {args:?}"
    );
}

#[test]
fn pinned_reports_are_byte_stable() {
    let f = |name: &str| fixture(name).display().to_string();
    let cases: Vec<(Vec<String>, &str, i32)> = vec![
        (
            vec!["check-residue-theorem".into(), f("annulus-checks.json")],
            "residue-theorem.expected.json",
            0,
        ),
        (
            vec!["check-inside-outside".into(), f("annulus-checks.json")],
            "inside-outside.expected.json",
            0,
        ),
        (
            vec![
                "residue".into(),
                "--end".into(),
                "0".into(),
                f("annulus-checks.json"),
            ],
            "residue-end0.expected.json",
            0,
        ),
        (
            vec!["check-splitting".into(), f("splitting.json")],
            "splitting.expected.json",
            0,
        ),
        (
            vec!["solve".into(), f("standard-instance.json")],
            "standard-solve.expected.json",
            0,
        ),
        (
            vec![
                "solve".into(),
                "--oracle".into(),
                f("divergence-differential.json"),
            ],
            "divergence-differential.expected.json",
            2,
        ),
        (
            vec![
                "solve".into(),
                "--oracle".into(),
                f("divergence-function.json"),
            ],
            "divergence-function.expected.json",
            2,
        ),
        (
            vec!["solve".into(), f("solve-zero.json")],
            "solve-zero.expected.json",
            0,
        ),
        (
            vec!["complete".into(), f("complete-one-free.json")],
            "complete-one-free.expected.json",
            0,
        ),
        (
            vec!["complete".into(), f("complete-all-free.json")],
            "complete-all-free.expected.json",
            0,
        ),
        (
            vec!["pullback".into(), f("pullback.json")],
            "pullback.expected.json",
            0,
        ),
        (
            vec!["basis".into(), "--ld".into(), f("basis-divisor.json")],
            "basis-ld.expected.json",
            0,
        ),
        (
            vec!["basis".into(), "--l1".into(), f("basis-divisor.json")],
            "basis-l1.expected.json",
            0,
        ),
        (
            vec![
                "solve-classical".into(),
                "--functions".into(),
                f("classical-jets.json"),
            ],
            "classical-functions.expected.json",
            0,
        ),
        (
            vec![
                "solve-classical".into(),
                "--differentials".into(),
                "--mode".into(),
                "principal".into(),
                f("classical-jets.json"),
            ],
            "classical-differentials.expected.json",
            0,
        ),
        (
            vec!["decompose".into(), f("decompose.json")],
            "decompose.expected.json",
            0,
        ),
        (
            vec!["approx".into(), f("approx.json")],
            "approx.expected.json",
            0,
        ),
    ];
    for (args, expect_file, code) in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_report(&refs, expect_file, code);
    }
}

#[test]
fn residue_theorem_fixture_reports_zero_sum() {
    let out = run(&[
        "check-residue-theorem",
        fixture("annulus-checks.json").to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"sum\": \"0\""));
    assert!(stdout.contains("\"ok\": true"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn divergence_fixture_flags_the_documented_case() {
    let out = run(&[
        "solve",
        "--oracle",
        fixture("divergence-differential.json").to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"verdict\": \"unsolvable\""));
    assert!(stdout.contains("\"oracle_verdict\": \"unsolvable\""));
    assert!(stdout.contains("documented divergence"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_data_solves_to_zero() {
    let out = run(&["solve", fixture("solve-zero.json").to_str().unwrap()]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"verdict\": \"solvable\""));
    assert!(stdout.contains("\"entire\": []"));
    assert!(stdout.contains("\"parts\": []"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn reports_are_deterministic_and_seed_is_echoed() {
    let path = fixture("standard-instance.json");
    let args = ["solve", "--seed", "7", path.to_str().unwrap()];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(
        a.stdout, b.stdout,
        "identical input and seed, different bytes"
    );
    let stdout = String::from_utf8(a.stdout).unwrap();
    assert!(stdout.contains("\"seed\": 7"));
}

#[test]
fn timing_goes_to_stderr_not_stdout() {
    let out = run(&["solve", fixture("solve-zero.json").to_str().unwrap()]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(!stdout.contains("elapsed"));
    assert!(stderr.contains("elapsed"));
}

#[test]
fn bad_rational_names_the_field() {
    let out = run(&[
        "check-residue-theorem",
        fixture("bad-rational.json").to_str().unwrap(),
    ]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("bad rational at discs[0].center"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn radius_out_of_range_is_an_error() {
    let out = run(&[
        "solve",
        fixture("radius-out-of-range.json").to_str().unwrap(),
    ]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("radius exponent out of range"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_json_reports_line_context() {
    let mut tmp = tempfile::NamedTempFile::new().unwrap();
    write!(tmp, "{{\"p\": 2,\n  \"discs\": [").unwrap();
    let out = run(&["solve", tmp.path().to_str().unwrap()]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("schema error"));
    assert!(stderr.contains("line 2"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_fields_are_schema_errors() {
    let mut tmp = tempfile::NamedTempFile::new().unwrap();
    write!(tmp, "{{\"p\": 2, \"dics\": []}}").unwrap();
    let out = run(&["solve", tmp.path().to_str().unwrap()]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("unknown field `dics`"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn argument_errors_exit_one() {
    let out = run(&["solve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["basis", fixture("basis-divisor.json").to_str().unwrap()]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("--l1 or --ld"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exact_semantics_divergence_reports_jet_verdict() {
    let out = run(&[
        "solve",
        "--oracle",
        fixture("divergence-function.json").to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"jet_verdict\": \"solvable\""));
    assert!(stdout.contains("\"verdict\": \"unsolvable\""));
    assert!(stdout.contains("documented divergence"));
    assert_eq!(out.status.code(), Some(2));
}
