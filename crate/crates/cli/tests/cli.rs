use std::path::PathBuf;
use std::process::Command;

use gfpsolve_cli::{run, EXIT_INVALID, EXIT_OK, EXIT_REJECTED};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gfpsolve").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn value_of(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("value.{key}=")))
        .unwrap_or_else(|| panic!("no value for {key} in {out}"))
        .parse()
        .unwrap()
}

#[test]
fn solve_gfp_of_example_system() {
    let f = fixture("delayed.pps");
    let (code, out, _) = call(&["solve", "--gfp", "--eps", "1e-9", "--kv", &f]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("vector: (0.5, 0.5, 0.666666666666667)"), "{out}");
    for (k, v) in [("a", 0.5), ("b", 0.5), ("c", 2.0 / 3.0)] {
        assert!((value_of(&out, k) - v).abs() <= 1e-9);
    }
}

#[test]
fn solve_float_and_certified_agree() {
    let f = fixture("delayed.pps");
    let (_, a, _) = call(&["solve", "--gfp", "--eps", "1e-6", "--mode", "float", "--kv", &f]);
    let (_, b, _) = call(&["solve", "--gfp", "--eps", "1e-6", "--certified", "--kv", &f]);
    assert!(a.contains("mode=float"));
    assert!(b.contains("certified: true"));
    for k in ["a", "b", "c"] {
        assert!((value_of(&a, k) - value_of(&b, k)).abs() <= 2e-6);
    }
}

#[test]
fn least_fixed_point_of_example() {
    let f = fixture("lottery.pps");
    let (_, g, _) = call(&["solve", "--gfp", "--kv", &f]);
    let (_, l, _) = call(&["solve", "--lfp", "--kv", &f]);
    assert!(value_of(&g, "a").abs() <= 1e-9, "{g}");
    assert_eq!(value_of(&l, "a"), 0.0, "{l}");
    assert_eq!(value_of(&l, "b"), 0.5);
    assert!(l.contains("fixed point: least"));
}

#[test]
fn qualitative_sets_of_example() {
    let (code, out, _) = call(&["qualitative", &fixture("lottery.pps")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("one set: {}"), "{out}");
    assert!(out.contains("zero set: {a}"), "{out}");
    let (_, out, _) = call(&["qualitative", &fixture("delayed.bmdp")]);
    assert!(out.contains("D: reach value 1"), "{out}");
}

#[test]
fn certify_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("s.pol");
    let good = dir.path().join("good.pol");
    let bad = dir.path().join("bad.pol");
    std::fs::write(&sigma, "").unwrap();
    std::fs::write(&good, "a = 0\n").unwrap();
    std::fs::write(&bad, "a = 1\n").unwrap();
    let f = fixture("lottery.pps");
    let s = sigma.to_string_lossy();
    let (code, out, _) = call(&["certify", "--sigma", &s, "--tau", &good.to_string_lossy(), &f]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("accepted"));
    let (code, out, _) = call(&["certify", "--sigma", &s, "--tau", &bad.to_string_lossy(), &f]);
    assert_eq!(code, EXIT_REJECTED);
    assert!(out.contains("rejected: "), "{out}");
}

#[test]
fn policy_file_drives_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("t.strat");
    let m = fixture("delayed.bmdp");
    let (code, _, _) = call(&["policy", "--kind", "threshold", "--eps", "0.05", "--out", &strat.to_string_lossy(), &m]);
    assert_eq!(code, EXIT_OK);
    let args = ["simulate", "--runs", "20", "--seed", "9", "--strategy", &strat.to_string_lossy(), &m];
    let (code, a, summary) = call(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(a.lines().next(), Some("run,verdict,generations,peak"));
    assert_eq!(a.lines().count(), 21);
    assert!(summary.contains("reached"));
    let (_, b, _) = call(&args);
    assert_eq!(a, b);
}

#[test]
fn convert_matches_fixture() {
    let (code, out, _) = call(&["convert", &fixture("delayed.bmdp")]);
    assert_eq!(code, EXIT_OK);
    let expected = gfpsolve::format::parse_pps(&std::fs::read_to_string(fixture("delayed.pps")).unwrap()).unwrap();
    assert_eq!(gfpsolve::format::parse_pps(&out).unwrap().equations, expected.equations);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pps");
    std::fs::write(&bad, "x = min{}\n").unwrap();
    let (code, _, err) = call(&["solve", &bad.to_string_lossy()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("line 1, column 9"), "{err}");
    let (code, _, err) = call(&["simulate", "--runs", "0", &fixture("lottery.bmdp")]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("runs must be positive"));
    let (code, _, _) = call(&["solve", "--eps", "2", &fixture("lottery.pps")]);
    assert_eq!(code, EXIT_INVALID);
    let (code, _, _) = call(&["solve", "/nonexistent/x.pps"]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn binary_reports_exit_codes() {
    let out = Command::new(env!("CARGO_BIN_EXE_gfpsolve"))
        .args(["solve", "--gfp", &fixture("delayed.pps")])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("b = 0.5"));
    let out = Command::new(env!("CARGO_BIN_EXE_gfpsolve")).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
}

#[test]
fn mode_from_environment_is_overridden_by_flag() {
    let f = fixture("delayed.pps");
    let out = Command::new(env!("CARGO_BIN_EXE_gfpsolve"))
        .env("GFPSOLVE_MODE", "float")
        .args(["solve", "--kv", &f])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("mode=float"));
    let out = Command::new(env!("CARGO_BIN_EXE_gfpsolve"))
        .env("GFPSOLVE_MODE", "float")
        .args(["solve", "--kv", "--mode", "exact", &f])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("mode=exact"));
}
