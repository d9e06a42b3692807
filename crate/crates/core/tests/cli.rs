use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use gtrs::cli::{run, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION};
use gtrs::slemma::SlemmaVerdict;
use gtrs::solver::SolveReport;

const E1: &str = r#"{"n":1,"A":[-1],"a":[0],"c":0,"B":[1],"b":[0],"d":0,"alpha":1,"beta":4}"#;
const E2: &str = r#"{"n":1,"A":[-1],"a":[0],"c":0.5,"B":[0],"b":[1],"d":0,"alpha":-1,"beta":1}"#;

fn temp_file(contents: &str) -> PathBuf {
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let k = NEXT.fetch_add(1, Ordering::Relaxed);
    let path = std::env::temp_dir().join(format!("gtrs-cli-{}-{k}.json", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

fn gtrs(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("gtrs").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn solve_e1_text() {
    let p = temp_file(E1);
    let (code, out, _) = gtrs(&["solve", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("route: DualPath"), "{out}");
    assert!(out.contains("value: -4"), "{out}");
}

#[test]
fn solve_json_round_trips() {
    let p = temp_file(E1);
    let (code, out, _) = gtrs(&["solve", p.to_str().unwrap(), "--json"]);
    assert_eq!(code, EXIT_OK);
    let r: SolveReport = serde_json::from_str(&out).unwrap();
    assert!((r.value + 4.0).abs() < 1e-9);
    assert_eq!(serde_json::to_string_pretty(&r).unwrap().trim(), out.trim());
}

#[test]
fn slemma_e2_exception() {
    let p = temp_file(E2);
    let (code, out, _) = gtrs(&["slemma", p.to_str().unwrap(), "--kind", "interval"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("ExceptionHolds nu="), "{out}");
    let (_, out, _) = gtrs(&[
        "slemma",
        p.to_str().unwrap(),
        "--kind",
        "interval",
        "--json",
    ]);
    let v: SlemmaVerdict = serde_json::from_str(&out).unwrap();
    assert!(v.s1_holds());
}

#[test]
fn missing_field_is_named() {
    let p = temp_file(r#"{"n":1,"A":[-1],"a":[0],"c":0,"B":[1],"b":[0],"d":0,"alpha":1}"#);
    let (code, _, err) = gtrs(&["solve", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_PARSE);
    assert!(err.contains("beta"), "{err}");
}

#[test]
fn eq_kind_needs_equal_bounds() {
    let p = temp_file(E1);
    let (code, _, err) = gtrs(&["slemma", p.to_str().unwrap(), "--kind", "eq"]);
    assert_eq!(code, EXIT_PRECONDITION);
    assert!(err.contains("eq"), "{err}");
}

#[test]
fn repeated_runs_are_identical() {
    let p = temp_file(E2);
    let args = [
        "oracle-compare",
        p.to_str().unwrap(),
        "--seed",
        "7",
        "--json",
    ];
    let first = gtrs(&args);
    assert_eq!(first.0, EXIT_OK);
    assert_eq!(first, gtrs(&args));
}

#[test]
fn certify_checks_certificates() {
    let p = temp_file(E1);
    let good =
        temp_file(r#"{"kind":"Multiplier","mu":-1.0,"mu_plus":0.0,"mu_minus":1.0,"level":-4.0}"#);
    let bad =
        temp_file(r#"{"kind":"Multiplier","mu":-1.0,"mu_plus":0.0,"mu_minus":1.0,"level":-3.0}"#);
    let (code, out, _) = gtrs(&["certify", p.to_str().unwrap(), good.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "Multiplier: valid\n");
    let (_, out, _) = gtrs(&["certify", p.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out, "Multiplier: invalid\n");
}
