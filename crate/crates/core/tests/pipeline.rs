use gfpsolve::bmdp::{qualitative_reach, reachability_values, to_nonreach_pps, ReachClass};
use gfpsolve::format::{parse_bmdp, parse_pps, parse_strategy, write_strategy};
use gfpsolve::sim::{estimate_reach, simulate_run, Controller, RunConfig, Verdict};
use gfpsolve::strategy::{describe_queen_worker, describe_static_min, describe_threshold};
use gfpsolve::{to_snf, SolveOptions};

const LOTTERY: &str = include_str!("fixtures/lottery.bmdp");
const DELAYED: &str = include_str!("fixtures/delayed.bmdp");

#[test]
fn fixture_systems_match_reductions() {
    for (b, p) in [(LOTTERY, "fixtures/lottery.pps"), (DELAYED, "fixtures/delayed.pps")] {
        let red = to_nonreach_pps(&parse_bmdp(b).unwrap()).unwrap();
        let text = std::fs::read_to_string(format!("{}/tests/{p}", env!("CARGO_MANIFEST_DIR"))).unwrap();
        let pps = parse_pps(&text).unwrap();
        assert_eq!(pps.equations, red.pps.equations);
    }
}

#[test]
fn delayed_commit_values_and_classes() {
    let m = parse_bmdp(DELAYED).unwrap();
    let rep = reachability_values(&m, &SolveOptions::with_eps(1e-9)).unwrap();
    assert!((rep.reach[0] - 0.5).abs() < 1e-9);
    assert!((rep.reach[2] - 1.0 / 3.0).abs() < 1e-9);
    let q = qualitative_reach(&m).unwrap();
    assert_eq!(q.per_type[0], ReachClass::Between);
    assert_eq!(q.per_type[3], ReachClass::Sure);
}

#[test]
fn strategies_round_trip_through_text() {
    let m = parse_bmdp(DELAYED).unwrap();
    let red = to_nonreach_pps(&m).unwrap();
    let snf = to_snf(&red.pps).unwrap();
    for s in [describe_threshold(&snf, 0.05).unwrap(), describe_static_min(&snf, 0.05).unwrap()] {
        let text = write_strategy(&s, &red.pps.names);
        assert!(text.starts_with("kind: "));
        assert_eq!(parse_strategy(&text, &red.pps).unwrap(), s, "{text}");
    }
    let m = parse_bmdp(LOTTERY).unwrap();
    let red = to_nonreach_pps(&m).unwrap();
    let s = describe_queen_worker(&to_snf(&red.pps).unwrap()).unwrap();
    assert_eq!(parse_strategy(&write_strategy(&s, &red.pps.names), &red.pps).unwrap(), s);
}

#[test]
fn simulation_is_reproducible_and_stream_independent() {
    let m = parse_bmdp(DELAYED).unwrap();
    let red = to_nonreach_pps(&m).unwrap();
    let s = describe_threshold(&to_snf(&red.pps).unwrap(), 0.05).unwrap();
    let ctrl = Controller::new(&m, &[s]).unwrap();
    let cfg = RunConfig { seed: 7, ..RunConfig::default() };
    let a: Vec<_> = (0..50).map(|r| simulate_run(&ctrl, &[1, 0, 0, 0], r, &cfg)).collect();
    let b: Vec<_> = (0..50).rev().map(|r| simulate_run(&ctrl, &[1, 0, 0, 0], r, &cfg)).collect();
    assert!(a.iter().eq(b.iter().rev()));
    assert!(a.iter().any(|o| o.verdict == Verdict::Reached));
    assert!(a.iter().any(|o| o.verdict == Verdict::Extinct));
}

#[test]
fn static_strategy_matches_known_value() {
    // Always commit: reach probability from A is 2/3 * (1 - (2/3)^2) = 10/27.
    let m = parse_bmdp(DELAYED).unwrap();
    let red = to_nonreach_pps(&m).unwrap();
    let text = "kind: static\nplayer: min\n[policy]\nB = 1\n";
    let s = parse_strategy(text, &red.pps).unwrap();
    let runs = 20_000;
    let est = estimate_reach(&m, &[1, 0, 0, 0], &[s], runs, &RunConfig::default()).unwrap();
    let v: f64 = 10.0 / 27.0;
    let tol = 4.0 * (v * (1.0 - v) / runs as f64).sqrt() + est.censored as f64 / runs as f64;
    assert!((est.p_hat - v).abs() <= tol, "{est:?}");
}

#[test]
fn zero_runs_rejected() {
    let m = parse_bmdp(LOTTERY).unwrap();
    let err = estimate_reach(&m, &[1, 0, 0], &[], 0, &RunConfig::default()).unwrap_err();
    assert!(err.to_string().contains("runs must be positive"));
}
