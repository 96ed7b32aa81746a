//! Generation-synchronous Monte Carlo simulation of a branching process under a strategy.
//!
//! Randomness is drawn from a ChaCha stream per run, addressed by generation, position in
//! the canonically ordered population and purpose, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bmdp::{to_nonreach_pps, Bssg, Owner};
use crate::error::{Error, Result};
use crate::policy::{Choice, Policy};
use crate::pps::Player;
use crate::scalar::Scalar;
use crate::strategy::{StrategyDescriptor, StrategyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Reached,
    Extinct,
    Censored,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Reached => "reached",
            Verdict::Extinct => "extinct",
            Verdict::Censored => "censored",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub generations: u32,
    pub peak: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub max_generations: u32,
    pub max_population: u64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_generations: 1000,
            max_population: 10_000,
            seed: 0,
        }
    }
}

/// Cumulative rule and action tables in `f64`, indexed by type.
struct Tables {
    rules: Vec<Vec<(f64, Vec<usize>)>>,
    /// `rules[t]` is for action 0; other actions follow in `by_action[t][a]`.
    by_action: Vec<Vec<Vec<(f64, Vec<usize>)>>>,
    owner: Vec<Owner>,
    target: Vec<bool>,
}

fn cumulative(weights: impl Iterator<Item = (f64, Vec<usize>)>) -> Vec<(f64, Vec<usize>)> {
    let mut acc = 0.0;
    weights
        .map(|(p, o)| {
            acc += p;
            (acc, o)
        })
        .collect()
}

fn pick<T: Clone>(table: &[(f64, T)], u: f64) -> T {
    let total = table.last().map_or(1.0, |l| l.0);
    let u = u * total;
    table
        .iter()
        .find(|(c, _)| u < *c)
        .or(table.last())
        .map(|(_, v)| v.clone())
        .expect("non-empty table")
}

/// Per-type action selection compiled from a policy.
type ActionTable = Vec<Option<Vec<(f64, usize)>>>;

fn compile_policy(model: &Bssg, var_type: &[usize], p: &Policy) -> ActionTable {
    let mut out = vec![None; model.types.len()];
    for (&v, c) in &p.choices {
        let t = var_type[v];
        let w = match c {
            Choice::Pure(b) => vec![(1.0, *b)],
            Choice::Mixed(w) => {
                let mut acc = 0.0;
                w.iter()
                    .map(|(b, x)| {
                        acc += Scalar::to_f64(x);
                        (acc, *b)
                    })
                    .collect()
            }
        };
        out[t] = Some(w);
    }
    out
}

enum Compiled {
    Static(ActionTable),
    Threshold {
        sigma: ActionTable,
        tau: ActionTable,
        threshold: u64,
        uncounted: Vec<bool>,
    },
    QueenWorker {
        queen: ActionTable,
        worker: ActionTable,
        zero: Vec<bool>,
    },
}

/// Strategies of both controllers, compiled against a model.
pub struct Controller {
    tables: Tables,
    reach_max: Option<Compiled>,
    reach_min: Option<Compiled>,
}

impl Controller {
    pub fn new(model: &Bssg, strategies: &[StrategyDescriptor]) -> Result<Controller> {
        let red = to_nonreach_pps(model)?;
        let n = model.types.len();
        let mut by_action = Vec::with_capacity(n);
        for t in &model.types {
            by_action.push(
                t.actions
                    .iter()
                    .map(|a| cumulative(a.rules.iter().map(|r| (Scalar::to_f64(&r.prob), r.offspring.clone()))))
                    .collect::<Vec<_>>(),
            );
        }
        let tables = Tables {
            rules: by_action.iter().map(|a| a.first().cloned().unwrap_or_default()).collect(),
            by_action,
            owner: model.types.iter().map(|t| t.owner).collect(),
            target: (0..n).map(|t| model.is_target(t)).collect(),
        };
        let per_type = |mask: &[bool]| -> Vec<bool> {
            (0..n).map(|t| red.var_of_type[t].is_some_and(|v| mask[v])).collect()
        };
        let mut reach_max = None;
        let mut reach_min = None;
        for s in strategies {
            let c = match &s.kind {
                StrategyKind::Static(p) => Compiled::Static(compile_policy(model, &red.type_of_var, p)),
                StrategyKind::Threshold {
                    sigma,
                    tau,
                    effective_threshold,
                    uncounted,
                    ..
                } => Compiled::Threshold {
                    sigma: compile_policy(model, &red.type_of_var, sigma),
                    tau: compile_policy(model, &red.type_of_var, tau),
                    threshold: *effective_threshold,
                    uncounted: per_type(uncounted),
                },
                StrategyKind::QueenWorker { queen, worker, zero, .. } => Compiled::QueenWorker {
                    queen: compile_policy(model, &red.type_of_var, queen),
                    worker: compile_policy(model, &red.type_of_var, worker),
                    zero: per_type(zero),
                },
            };
            match s.player {
                Player::Min => reach_max = Some(c),
                Player::Max => reach_min = Some(c),
            }
        }
        for (t, td) in model.types.iter().enumerate() {
            if model.is_target(t) || td.actions.len() < 2 {
                continue;
            }
            let has = match td.owner {
                Owner::ReachMaximizer => reach_max.is_some(),
                Owner::ReachMinimizer => reach_min.is_some(),
                Owner::Random => true,
            };
            if !has {
                return Err(Error::invalid(format!("no strategy controls type {}", td.name)));
            }
        }
        Ok(Controller {
            tables,
            reach_max,
            reach_min,
        })
    }
}

#[derive(Clone, Copy)]
struct Entity {
    ty: usize,
    queen: bool,
}

fn draw(rng: &mut ChaCha8Rng, generation: u32, index: usize, slot: u128) -> f64 {
    let pos = ((generation as u128) << 42) | ((index as u128) << 2) | slot;
    rng.set_word_pos(pos * 2);
    rng.gen::<f64>()
}

fn choose(table: &ActionTable, ty: usize, u: f64) -> usize {
    match &table[ty] {
        Some(t) => pick(t, u),
        None => 0,
    }
}

/// Simulates one run from an initial population given as counts per type.
pub fn simulate_run(ctrl: &Controller, init: &[usize], run: u64, cfg: &RunConfig) -> RunOutcome {
    let tb = &ctrl.tables;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(run);
    let mut pop: Vec<Entity> = Vec::new();
    for (t, &c) in init.iter().enumerate() {
        pop.extend(std::iter::repeat(Entity { ty: t, queen: false }).take(c));
    }
    if let Some(Compiled::QueenWorker { zero, .. }) = &ctrl.reach_max {
        if let Some(e) = pop.iter_mut().find(|e| zero[e.ty]) {
            e.queen = true;
        }
    }
    let mut peak = pop.len() as u64;
    if pop.iter().any(|e| tb.target[e.ty]) {
        return RunOutcome { verdict: Verdict::Reached, generations: 0, peak };
    }
    let mut switched = false;
    let mut generation = 0u32;
    loop {
        if pop.is_empty() {
            return RunOutcome { verdict: Verdict::Extinct, generations: generation, peak };
        }
        if generation >= cfg.max_generations || pop.len() as u64 > cfg.max_population {
            return RunOutcome { verdict: Verdict::Censored, generations: generation, peak };
        }
        pop.sort_by_key(|e| e.ty);
        if let Some(Compiled::Threshold { threshold, uncounted, .. }) = &ctrl.reach_max {
            let counted = pop.iter().filter(|e| !uncounted[e.ty]).count() as u64;
            switched |= counted >= *threshold;
        }
        let mut next: Vec<Entity> = Vec::with_capacity(pop.len() * 2);
        let mut reached = false;
        for (idx, e) in pop.iter().enumerate() {
            let ctrl_for = match tb.owner[e.ty] {
                Owner::ReachMaximizer => ctrl.reach_max.as_ref(),
                Owner::ReachMinimizer => ctrl.reach_min.as_ref(),
                Owner::Random => None,
            };
            let u = draw(&mut rng, generation, idx, 0);
            let action = match ctrl_for {
                None => 0,
                Some(Compiled::Static(t)) => choose(t, e.ty, u),
                Some(Compiled::Threshold { sigma, tau, .. }) => {
                    choose(if switched { tau } else { sigma }, e.ty, u)
                }
                Some(Compiled::QueenWorker { queen, worker, .. }) => {
                    choose(if e.queen { queen } else { worker }, e.ty, u)
                }
            };
            let rules = if action == 0 { &tb.rules[e.ty] } else { &tb.by_action[e.ty][action] };
            if rules.is_empty() {
                continue;
            }
            let offspring = pick(rules, draw(&mut rng, generation, idx, 1));
            let mut heir = e.queen;
            for &c in &offspring {
                reached |= tb.target[c];
                let mut q = false;
                if heir {
                    if let Some(Compiled::QueenWorker { zero, .. }) = &ctrl.reach_max {
                        if zero[c] {
                            q = true;
                            heir = false;
                        }
                    }
                }
                next.push(Entity { ty: c, queen: q });
            }
        }
        generation += 1;
        peak = peak.max(next.len() as u64);
        if reached {
            return RunOutcome { verdict: Verdict::Reached, generations: generation, peak };
        }
        pop = next;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Estimate {
    pub runs: u64,
    pub reached: u64,
    pub extinct: u64,
    pub censored: u64,
    /// Fraction of runs that reached the target.
    pub p_hat: f64,
    /// Wilson score interval at 95% for the reach fraction.
    pub wilson: (f64, f64),
    /// Reach fraction if no censored run reaches, and if every censored run does.
    pub bracket: (f64, f64),
}

/// Wilson score interval for `k` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn simulate_many(ctrl: &Controller, init: &[usize], runs: u64, cfg: &RunConfig) -> Vec<RunOutcome> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..runs).into_par_iter().map(|r| simulate_run(ctrl, init, r, cfg)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..runs).map(|r| simulate_run(ctrl, init, r, cfg)).collect()
    }
}

pub fn summarize(outcomes: &[RunOutcome]) -> Estimate {
    let runs = outcomes.len() as u64;
    let count = |v: Verdict| outcomes.iter().filter(|o| o.verdict == v).count() as u64;
    let (reached, extinct, censored) = (count(Verdict::Reached), count(Verdict::Extinct), count(Verdict::Censored));
    let n = runs.max(1) as f64;
    Estimate {
        runs,
        reached,
        extinct,
        censored,
        p_hat: reached as f64 / n,
        wilson: wilson_interval(reached, runs, 1.959_963_984_540_054),
        bracket: (reached as f64 / n, (reached + censored) as f64 / n),
    }
}

/// Monte Carlo estimate of the probability of reaching the target.
pub fn estimate_reach(
    model: &Bssg,
    init: &[usize],
    strategies: &[StrategyDescriptor],
    runs: u64,
    cfg: &RunConfig,
) -> Result<Estimate> {
    if runs == 0 {
        return Err(Error::invalid("runs must be positive"));
    }
    let ctrl = Controller::new(model, strategies)?;
    Ok(summarize(&simulate_many(&ctrl, init, runs, cfg)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 50/100 at z = 1.96: 0.40383 .. 0.59617
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!((lo - 0.403_831).abs() < 1e-5 && (hi - 0.596_169).abs() < 1e-5);
        let (lo, hi) = wilson_interval(0, 10, 1.96);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277_53).abs() < 1e-4);
    }
}
