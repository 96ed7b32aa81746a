//! WebAssembly bindings for the browser demo. Every entry point takes model text and
//! returns a JSON string; failures come back as `{"error": "..."}`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gfpsolve::bmdp::to_nonreach_pps;
use gfpsolve::format::{parse_bmdp, parse_pps};
use gfpsolve::sim::{estimate_reach, RunConfig};
use gfpsolve::strategy::{describe_static_min, describe_threshold};
use gfpsolve::{solve_gfp, solve_lfp, to_snf, Mode, SolveOptions};

#[derive(Serialize)]
struct Failure {
    error: String,
}

fn json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&Failure { error }),
    }
    .unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

#[derive(Serialize)]
struct Solved {
    class: String,
    names: Vec<String>,
    values: Vec<f64>,
    exact: Vec<String>,
    iterations: usize,
    precision_bits: u32,
    residual: f64,
}

fn options(eps: f64, exact: bool) -> Result<SolveOptions, String> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(format!("eps must lie in (0, 1), got {eps}"));
    }
    let mut o = SolveOptions::with_eps(eps);
    o.mode = if exact { Mode::Exact } else { Mode::Float };
    Ok(o)
}

fn solve_inner(text: &str, eps: f64, greatest: bool, exact: bool) -> Result<Solved, String> {
    let pps = parse_pps(text).map_err(|e| e.to_string())?;
    let o = options(eps, exact)?;
    let rep = if greatest { solve_gfp(&pps, &o) } else { solve_lfp(&pps, &o) }.map_err(|e| e.to_string())?;
    Ok(Solved {
        class: rep.class.name().into(),
        exact: (0..rep.names.len()).map(|i| rep.values.render(i)).collect(),
        values: rep.values.to_f64(),
        names: rep.names,
        iterations: rep.iterations,
        precision_bits: rep.precision_bits,
        residual: rep.residual,
    })
}

/// Solves a `.pps` system for its greatest (or least) fixed point.
#[wasm_bindgen]
pub fn solve(text: &str, eps: f64, greatest: bool, exact: bool) -> String {
    json(solve_inner(text, eps, greatest, exact))
}

#[derive(Serialize)]
struct Convergence {
    names: Vec<String>,
    limit: Vec<f64>,
    /// Sup-norm distance to the limit after each Newton step.
    newton: Vec<f64>,
    /// Sup-norm distance to the limit after each value-iteration step from the all-ones vector.
    iteration: Vec<f64>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn convergence_inner(text: &str, steps: usize) -> Result<Convergence, String> {
    let pps = parse_pps(text).map_err(|e| e.to_string())?;
    let mut o = options(1e-12, false)?;
    o.record_trace = true;
    let rep = solve_gfp(&pps, &o).map_err(|e| e.to_string())?;
    let limit = rep.values.to_f64();
    let newton = rep
        .trace
        .iter()
        .map(|t| distance(&rep.snf.project(t), &limit))
        .collect();
    let c = to_snf(&pps).map_err(|e| e.to_string())?.compile::<f64>();
    let mut x = vec![1.0; rep.snf.len()];
    let mut iteration = Vec::with_capacity(steps);
    for _ in 0..steps.min(100_000) {
        x = c.eval(&x);
        iteration.push(distance(&rep.snf.project(&x), &limit));
    }
    Ok(Convergence {
        names: rep.names,
        limit,
        newton,
        iteration,
    })
}

/// Distance to the greatest fixed point per step, for Newton and for plain iteration.
#[wasm_bindgen]
pub fn convergence(text: &str, steps: usize) -> String {
    json(convergence_inner(text, steps))
}

#[derive(Serialize)]
struct Simulated {
    strategy: String,
    start: String,
    runs: u64,
    reached: u64,
    extinct: u64,
    censored: u64,
    p_hat: f64,
    wilson: (f64, f64),
    /// Optimal reach probability from the start type, computed by the solver.
    optimum: f64,
}

fn simulate_inner(text: &str, threshold: bool, eps: f64, runs: u64, seed: u64) -> Result<Simulated, String> {
    let model = parse_bmdp(text).map_err(|e| e.to_string())?;
    let red = to_nonreach_pps(&model).map_err(|e| e.to_string())?;
    let snf = to_snf(&red.pps).map_err(|e| e.to_string())?;
    let s = if threshold {
        describe_threshold(&snf, eps)
    } else {
        describe_static_min(&snf, eps)
    }
    .map_err(|e| e.to_string())?;
    let mut init = vec![0; model.types.len()];
    init[0] = 1;
    let cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    let est = estimate_reach(&model, &init, &[s.clone()], runs, &cfg).map_err(|e| e.to_string())?;
    let rep = gfpsolve::bmdp::reachability_values(&model, &options(1e-9, false)?).map_err(|e| e.to_string())?;
    Ok(Simulated {
        strategy: s.kind_name().into(),
        start: model.types[0].name.clone(),
        runs: est.runs,
        reached: est.reached,
        extinct: est.extinct,
        censored: est.censored,
        p_hat: est.p_hat,
        wilson: est.wilson,
        optimum: rep.reach[0],
    })
}

/// Monte Carlo estimate of the reach probability from one individual of the first type.
#[wasm_bindgen]
pub fn simulate(text: &str, threshold: bool, eps: f64, runs: u32, seed: u32) -> String {
    json(simulate_inner(text, threshold, eps, runs as u64, seed as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PPS: &str = "a = 2/3*b^2 + 1/3\nb = min{ a ; c }\nc = 2/3\n";
    const BMDP: &str = include_str!("../../core/tests/fixtures/delayed.bmdp");

    #[test]
    fn solve_returns_values() {
        let v: serde_json::Value = serde_json::from_str(&solve(PPS, 1e-9, true, true)).unwrap();
        let x = v["values"].as_array().unwrap();
        assert!((x[0].as_f64().unwrap() - 0.5).abs() < 1e-9);
        assert!((x[2].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn errors_are_reported_as_json() {
        let v: serde_json::Value = serde_json::from_str(&solve("x = min{}", 1e-3, true, false)).unwrap();
        assert!(v["error"].as_str().unwrap().contains("empty min"));
    }

    #[test]
    fn newton_beats_plain_iteration() {
        let v: serde_json::Value = serde_json::from_str(&convergence(PPS, 50)).unwrap();
        let newton = v["newton"].as_array().unwrap();
        let iter = v["iteration"].as_array().unwrap();
        assert_eq!(iter.len(), 50);
        assert!(newton.last().unwrap().as_f64().unwrap() < 1e-9);
        assert!(iter[newton.len() - 1].as_f64().unwrap() > newton.last().unwrap().as_f64().unwrap());
    }

    #[test]
    fn simulation_summary() {
        let v: serde_json::Value = serde_json::from_str(&simulate(BMDP, true, 0.05, 500, 1)).unwrap();
        assert_eq!(v["runs"].as_u64(), Some(500));
        assert!((v["optimum"].as_f64().unwrap() - 0.5).abs() < 1e-6);
        let p = v["p_hat"].as_f64().unwrap();
        assert!(p > 0.3 && p < 0.7, "{v}");
    }
}
