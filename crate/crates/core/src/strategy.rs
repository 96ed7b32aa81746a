//! Strategy descriptors on the original variables, ready for simulation and serialization.
//!
//! Policies here choose among the branches of the original max/min equations, which for a
//! reduced branching process are the actions of the corresponding type.

use num_bigint::BigUint;

use crate::error::Result;
use crate::pps::Player;
use crate::policy::Policy;
use crate::snf::SnfSystem;
use crate::synth::{
    eps_optimal_randomized_minpps, minpps_eps_policy1, nonstatic_threshold_strategy, queen_worker_strategy,
};
use crate::qualitative::{gfp_one_set, remove_one_vars};

#[derive(Clone, Debug, PartialEq)]
pub enum StrategyKind {
    /// Same (possibly randomized) choice for every individual of a kind, forever.
    Static(Policy),
    /// `sigma` until the counted population first reaches `effective_threshold`, then `tau`.
    Threshold {
        sigma: Policy,
        tau: Policy,
        threshold: BigUint,
        effective_threshold: u64,
        /// Kinds that are never counted towards the threshold.
        uncounted: Vec<bool>,
    },
    /// One designated queen follows `queen`; all other individuals follow `worker`.
    QueenWorker {
        queen: Policy,
        worker: Policy,
        /// Kinds the queen may be passed on to.
        zero: Vec<bool>,
        /// Witness tree steps on the normal form, by variable name, for reporting.
        trees: Vec<(String, String)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyDescriptor {
    pub player: Player,
    pub kind: StrategyKind,
    pub epsilon: Option<f64>,
    /// Free-form description of how the strategy was obtained.
    pub note: String,
}

impl StrategyDescriptor {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            StrategyKind::Static(ref p) if p.is_deterministic() => "static",
            StrategyKind::Static(_) => "randomized",
            StrategyKind::Threshold { .. } => "threshold",
            StrategyKind::QueenWorker { .. } => "queen-worker",
        }
    }
}

fn on_originals(snf: &SnfSystem, mask: &[bool]) -> Vec<bool> {
    snf.origin.iter().map(|&i| mask[i]).collect()
}

/// Deterministic ε-optimal static min policy on the full system.
pub fn describe_static_min(snf: &SnfSystem, eps: f64) -> Result<StrategyDescriptor> {
    let one = gfp_one_set(snf);
    let res = remove_one_vars(snf, &one.in_set);
    let sigma = minpps_eps_policy1(&res.system, eps)?;
    let full = crate::synth::lift_residual_policy(snf, &res, &sigma);
    Ok(StrategyDescriptor {
        player: Player::Min,
        kind: StrategyKind::Static(snf.project_policy(&full)),
        epsilon: Some(eps),
        note: "deterministic static policy from the approximate greatest fixed point".into(),
    })
}

pub fn describe_randomized(snf: &SnfSystem, eps: f64) -> Result<StrategyDescriptor> {
    let r = eps_optimal_randomized_minpps(snf, eps)?;
    Ok(StrategyDescriptor {
        player: Player::Min,
        kind: StrategyKind::Static(snf.project_policy(&r.policy)),
        epsilon: Some(eps),
        note: format!(
            "mixture of a deterministic policy with weight 2^-{} * eps on the witness policy",
            r.p.denom().bits().saturating_sub(1)
        ),
    })
}

pub fn describe_threshold(snf: &SnfSystem, eps: f64) -> Result<StrategyDescriptor> {
    let plan = nonstatic_threshold_strategy(snf, eps)?;
    Ok(StrategyDescriptor {
        player: Player::Min,
        kind: StrategyKind::Threshold {
            sigma: snf.project_policy(&plan.sigma),
            tau: snf.project_policy(&plan.tau),
            threshold: plan.threshold,
            effective_threshold: plan.effective_threshold,
            uncounted: on_originals(snf, &plan.one_set),
        },
        epsilon: Some(eps),
        note: "switch to the witness policy once the population is large".into(),
    })
}

pub fn describe_queen_worker(snf: &SnfSystem) -> Result<StrategyDescriptor> {
    let plan = queen_worker_strategy(snf)?;
    let name = |v: usize| snf.names[v].clone();
    let trees = plan
        .trees
        .iter()
        .map(|(&v, s)| {
            let step = match *s {
                crate::qualitative::TreeStep::Leaf => "leaf".to_string(),
                crate::qualitative::TreeStep::Follow(c) => name(c),
                crate::qualitative::TreeStep::Branch(a, b) => format!("{} {}", name(a), name(b)),
            };
            (name(v), step)
        })
        .collect();
    Ok(StrategyDescriptor {
        player: Player::Min,
        kind: StrategyKind::QueenWorker {
            queen: snf.project_policy(&plan.queen),
            worker: snf.project_policy(&plan.worker),
            zero: on_originals(snf, &plan.zero_set),
            trees,
        },
        epsilon: None,
        note: "reaches the target almost surely from every kind in the zero set".into(),
    })
}

/// Static max policy, for the reach-minimizing controller.
pub fn describe_static_max(snf: &SnfSystem, eps: f64, mode: crate::gnm::Mode) -> Result<StrategyDescriptor> {
    let p = crate::synth::eps_optimal_policy_maxpps(snf, eps, mode)?;
    Ok(StrategyDescriptor {
        player: Player::Max,
        kind: StrategyKind::Static(snf.project_policy(&p)),
        epsilon: Some(eps),
        note: "ε-optimal static max policy".into(),
    })
}
