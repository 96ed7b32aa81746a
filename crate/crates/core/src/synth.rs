//! Strategy synthesis: optimal and ε-optimal static policies, randomized mixtures,
//! population-threshold and queen/worker strategies.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::gnm::{solve_gfp_snf, solve_lfp_snf, Mode, SolveOptions};
use crate::graph::can_reach;
use crate::policy::{Choice, Policy};
use crate::pps::{Player, SystemClass};
use crate::qualitative::{gfp_one_set, gfp_zero_set, is_ldf, remove_one_vars, Residual, TreeStep};
use crate::scalar::{bits_for_eps, f64_to_ratio, max_abs_diff, pow2_neg, Scalar};
use crate::snf::{SnfForm, SnfSystem};

/// For every max row, the child with the larger value; values within `2 tol` count as tied
/// and the child with the lower variable index wins.
pub fn optimal_max_policy_gfp<S: Scalar>(snf: &SnfSystem, g: &[S], tol: f64) -> Policy {
    let tol2 = S::from_ratio(&f64_to_ratio(2.0 * tol));
    let mut p = Policy::new(Player::Max);
    for (i, f) in snf.forms.iter().enumerate() {
        if let SnfForm::M(Player::Max, j, k) = *f {
            let diff = g[k].clone() - g[j].clone();
            let b = if diff > tol2 {
                1
            } else if -diff > tol2 || j <= k {
                0
            } else {
                1
            };
            p.set(i, Choice::Pure(b));
        }
    }
    p
}

/// For every min row, the child with the smaller value; exact ties go to the lower index.
fn argmin_policy(snf: &SnfSystem, y: &[BigRational]) -> Policy {
    let mut p = Policy::new(Player::Min);
    for (i, f) in snf.forms.iter().enumerate() {
        if let SnfForm::M(Player::Min, j, k) = *f {
            let b = if y[k] < y[j] || (y[k] == y[j] && k < j) { 1 } else { 0 };
            p.set(i, Choice::Pure(b));
        }
    }
    p
}

fn exact_opts(eps_bits: u32) -> SolveOptions {
    SolveOptions {
        eps: 2f64.powi(-(eps_bits as i32)),
        mode: Mode::Exact,
        h_cap: eps_bits + 16,
        ..SolveOptions::default()
    }
}

/// Repairs the argmin policy at `y` until every variable can reach a product, a
/// deficient or a constant-fed variable; `None` if no admissible switch remains.
fn repair_dead_ends(snf: &SnfSystem, y: &[BigRational], threshold: &BigRational) -> Option<Policy> {
    let mut sigma = argmin_policy(snf, y);
    for _ in 0..=snf.len() {
        let sys = snf.apply_policy(&sigma).ok()?;
        let seeds: Vec<bool> = sys
            .forms
            .iter()
            .map(|f| f.is_q() || f.at_one() < BigRational::one() || f.at_zero() > BigRational::zero())
            .collect();
        let live = can_reach(&sys.dependency_graph(), &seeds);
        if live.iter().all(|&b| b) {
            return Some(sigma);
        }
        let mut switched = false;
        for (i, f) in snf.forms.iter().enumerate() {
            if live[i] {
                continue;
            }
            if let SnfForm::M(Player::Min, j, k) = *f {
                let cur = sigma.pure(i).unwrap_or(0);
                let other = if cur == 1 { j } else { k };
                let close = (y[i].clone() - y[other].clone()).abs() <= *threshold;
                if live[other] && close {
                    sigma.set(i, Choice::Pure(1 - cur));
                    switched = true;
                    break;
                }
            }
        }
        if !switched {
            return None;
        }
    }
    None
}

/// Deterministic min policy whose least fixed point is within `eps` of the greatest fixed
/// point of a minPPS with `g* < 1` everywhere.
///
/// Approximates `g*` to `max(2^-60, 2^(-14|P|-3) eps)`, takes the pointwise argmin and
/// repairs dead ends; the result is verified and the precision doubled on failure.
pub fn minpps_eps_policy1(snf: &SnfSystem, eps: f64) -> Result<Policy> {
    if snf.classify() == SystemClass::MaxPps || snf.classify() == SystemClass::MaxMinPps {
        return Err(Error::invalid("expected a minPPS"));
    }
    let one = gfp_one_set(snf);
    if one.in_set.iter().any(|&b| b) {
        return Err(Error::invalid("expected a minPPS with g* < 1 everywhere"));
    }
    let size = snf.encoding_size() as u32;
    let full_bits = 14 * size + 3 + bits_for_eps(eps);
    let mut bits = full_bits.min(60);
    loop {
        let y = solve_gfp_snf::<BigRational>(snf, &exact_opts(bits))?.values;
        let threshold = pow2_neg(bits - 1);
        if let Some(sigma) = repair_dead_ends(snf, &y, &threshold) {
            if verify_min_policy(snf, &sigma, &y, eps)? {
                return Ok(sigma);
            }
        }
        if bits >= full_bits {
            return Err(Error::solver("could not synthesize an ε-optimal min policy"));
        }
        bits = (bits * 2).min(full_bits);
    }
}

fn verify_min_policy(snf: &SnfSystem, sigma: &Policy, y: &[BigRational], eps: f64) -> Result<bool> {
    let sys = snf.apply_policy(sigma)?;
    if !is_ldf(&sys, None)?.ldf {
        return Ok(false);
    }
    let bits = bits_for_eps(eps) + 4;
    let q = solve_lfp_snf::<BigRational>(&sys, &exact_opts(bits))?.values;
    Ok(Scalar::to_f64(&max_abs_diff(&q, y)) <= eps / 2.0)
}

/// Max policy whose greatest fixed point is within `eps` of that of a maxPPS.
pub fn eps_optimal_policy_maxpps(snf: &SnfSystem, eps: f64, mode: Mode) -> Result<Policy> {
    if snf.classify() == SystemClass::MinPps || snf.classify() == SystemClass::MaxMinPps {
        return Err(Error::invalid("expected a maxPPS"));
    }
    let one = gfp_one_set(snf);
    let mut acc = eps / 4.0;
    for _ in 0..4 {
        let opts = SolveOptions {
            eps: acc,
            mode,
            h_cap: (bits_for_eps(acc) + 16).max(128),
            ..SolveOptions::default()
        };
        let (pol, ok) = match mode {
            Mode::Exact => max_candidate::<BigRational>(snf, &one.max_witness, &one.in_set, &opts, eps)?,
            Mode::Float => max_candidate::<f64>(snf, &one.max_witness, &one.in_set, &opts, eps)?,
        };
        if ok {
            return Ok(pol);
        }
        acc /= 1024.0;
    }
    Err(Error::solver("could not synthesize an ε-optimal max policy"))
}

fn max_candidate<S: Scalar>(
    snf: &SnfSystem,
    witness: &Policy,
    one: &[bool],
    opts: &SolveOptions,
    eps: f64,
) -> Result<(Policy, bool)> {
    let g = solve_gfp_snf::<S>(snf, opts)?.values;
    let mut pol = optimal_max_policy_gfp(snf, &g, opts.eps);
    for (&v, c) in &witness.choices {
        if one[v] {
            pol.set(v, c.clone());
        }
    }
    let sys = snf.apply_policy(&pol)?;
    let gs = solve_gfp_snf::<S>(&sys, opts)?.values;
    Ok((pol, Scalar::to_f64(&max_abs_diff(&g, &gs)) <= eps))
}

/// Plays `tau` with probability `p` and `sigma` with probability `1 - p` at every row.
pub fn mix_policies(sigma: &Policy, tau: &Policy, p: &BigRational) -> Policy {
    let mut out = Policy::new(sigma.player);
    let q = BigRational::one() - p;
    let keys: std::collections::BTreeSet<usize> = sigma.choices.keys().chain(tau.choices.keys()).copied().collect();
    for v in keys {
        let mut w = Vec::new();
        match (sigma.choices.get(&v), tau.choices.get(&v)) {
            (Some(s), Some(t)) => {
                w.extend(s.weights().into_iter().map(|(b, x)| (b, x * &q)));
                w.extend(t.weights().into_iter().map(|(b, x)| (b, x * p)));
            }
            (Some(c), None) | (None, Some(c)) => w = c.weights(),
            (None, None) => {}
        }
        out.set(v, Choice::mixed(w));
    }
    out
}

/// Lifts a residual policy back to the parent system. Rows that pruning fixed or simplified
/// pick the child whose substituted constant is best for the player: 1 over unknown over 0
/// for max, the reverse for min, lower branch on ties.
pub fn lift_residual_policy(parent: &SnfSystem, res: &Residual, p: &Policy) -> Policy {
    let mut out = Policy::new(p.player);
    for (&r, c) in &p.choices {
        out.set(res.keep[r], c.clone());
    }
    let rank = |v: usize| match res.fixed[v] {
        Some(true) => 2,
        None => 1,
        Some(false) => 0,
    };
    for (i, f) in parent.forms.iter().enumerate() {
        if let SnfForm::M(player, j, k) = *f {
            if player == p.player && !out.choices.contains_key(&i) {
                let second = match player {
                    Player::Max => rank(k) > rank(j),
                    Player::Min => rank(k) < rank(j),
                };
                out.set(i, Choice::Pure(usize::from(second)));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct RandomizedPolicy {
    /// The mixture, on the full normal form.
    pub policy: Policy,
    pub sigma: Policy,
    pub tau: Policy,
    pub p: BigRational,
}

/// Randomized static min policy that is ε-optimal for the greatest fixed point: the
/// ε/2-optimal deterministic policy perturbed by a tiny weight on the LDF witness.
pub fn eps_optimal_randomized_minpps(snf: &SnfSystem, eps: f64) -> Result<RandomizedPolicy> {
    let one = gfp_one_set(snf);
    let res = remove_one_vars(snf, &one.in_set);
    let sigma = minpps_eps_policy1(&res.system, eps / 2.0)?;
    let tau = gfp_one_set(&res.system).min_witness;
    let size = res.system.encoding_size() as u32;
    let p = pow2_neg(28 * size + 4) * f64_to_ratio(eps);
    let mixed = mix_policies(&sigma, &tau, &p);
    Ok(RandomizedPolicy {
        policy: lift_residual_policy(snf, &res, &mixed),
        sigma: lift_residual_policy(snf, &res, &sigma),
        tau: lift_residual_policy(snf, &res, &tau),
        p,
    })
}

#[derive(Clone, Debug)]
pub struct ThresholdPlan {
    /// Followed while the population is small.
    pub sigma: Policy,
    /// LDF witness followed once the population has reached the threshold.
    pub tau: Policy,
    /// `ceil(2^(4|P|+1) / eps)` with `|P|` the size of the pruned system.
    pub threshold: BigUint,
    /// Smallest population size `m` with `(max_i g*_τ,i)^m ≤ eps/2`, bounded by `threshold`.
    pub effective_threshold: u64,
    /// Normal-form variables with `g* = 1`; individuals of these kinds are not counted.
    pub one_set: Vec<bool>,
}

/// Follows the ε/2-optimal static policy until the population first reaches the threshold,
/// then the witness policy that keeps every kind's non-reach probability below one.
pub fn nonstatic_threshold_strategy(snf: &SnfSystem, eps: f64) -> Result<ThresholdPlan> {
    let one = gfp_one_set(snf);
    let res = remove_one_vars(snf, &one.in_set);
    let sigma = minpps_eps_policy1(&res.system, eps / 2.0)?;
    let tau = gfp_one_set(&res.system).min_witness;
    let size = res.system.encoding_size();
    let num = BigUint::one() << ((4 * size + 1) as usize);
    let e = f64_to_ratio(eps);
    let q = BigRational::from_integer(num.into()) / e;
    let threshold = q.ceil().to_integer().to_biguint().unwrap_or_default();

    let witness_sys = res.system.apply_policy(&tau)?;
    let g = solve_gfp_snf::<f64>(&witness_sys, &SolveOptions::with_eps(1e-12).float())?.values;
    let worst = g.iter().fold(0.0f64, |m, &v| m.max(v)) + 1e-9;
    let measured = if worst <= 0.0 {
        1
    } else if worst >= 1.0 {
        u64::MAX
    } else {
        ((eps / 2.0).ln() / worst.ln()).ceil().max(1.0) as u64
    };
    let effective = threshold.to_u64().map_or(measured, |t| t.min(measured));
    Ok(ThresholdPlan {
        sigma: lift_residual_policy(snf, &res, &sigma),
        tau: lift_residual_policy(snf, &res, &tau),
        threshold,
        effective_threshold: effective.max(1),
        one_set: one.in_set,
    })
}

#[derive(Clone, Debug)]
pub struct QueenWorkerPlan {
    /// Policy of the queen: keeps the queen's kind inside the zero set.
    pub queen: Policy,
    /// Policy of every other individual: the LDF witness.
    pub worker: Policy,
    /// Normal-form variables with `g* = 0`.
    pub zero_set: Vec<bool>,
    pub trees: BTreeMap<usize, TreeStep>,
}

/// Strategy reaching the target almost surely from every kind in the zero set.
pub fn queen_worker_strategy(snf: &SnfSystem) -> Result<QueenWorkerPlan> {
    let one = gfp_one_set(snf);
    let res = remove_one_vars(snf, &one.in_set);
    let z = gfp_zero_set(&res.system)?;
    let worker = gfp_one_set(&res.system).min_witness;
    let mut zero_set = vec![false; snf.len()];
    for (r, &p) in res.keep.iter().enumerate() {
        zero_set[p] = z.in_set[r];
    }
    let map = |s: TreeStep| match s {
        TreeStep::Leaf => TreeStep::Leaf,
        TreeStep::Follow(c) => TreeStep::Follow(res.keep[c]),
        TreeStep::Branch(a, b) => TreeStep::Branch(res.keep[a], res.keep[b]),
    };
    Ok(QueenWorkerPlan {
        queen: lift_residual_policy(snf, &res, &z.tau_star),
        worker: lift_residual_policy(snf, &res, &worker),
        zero_set,
        trees: z.trees.iter().map(|(&k, &v)| (res.keep[k], map(v))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn sys(forms: Vec<SnfForm>) -> SnfSystem {
        let names = (0..forms.len()).map(|i| format!("x{i}")).collect();
        SnfSystem::from_forms(names, forms)
    }

    fn square_branch() -> SnfSystem {
        sys(vec![SnfForm::M(Player::Min, 1, 2), SnfForm::Q(0, 0), SnfForm::constant(rat(1, 2))])
    }

    fn two_thirds() -> SnfSystem {
        sys(vec![
            SnfForm::linear(rat(1, 3), vec![(1, rat(2, 3))]),
            SnfForm::Q(2, 2),
            SnfForm::M(Player::Min, 0, 3),
            SnfForm::constant(rat(2, 3)),
        ])
    }

    #[test]
    fn deterministic_min_policies() {
        assert_eq!(minpps_eps_policy1(&square_branch(), 1e-3).unwrap().pure(0), Some(0));
        assert_eq!(minpps_eps_policy1(&two_thirds(), 1e-3).unwrap().pure(2), Some(0));
    }

    #[test]
    fn mixture_weights() {
        let mut s = Policy::new(Player::Min);
        s.set(0, Choice::Pure(0));
        let mut t = Policy::new(Player::Min);
        t.set(0, Choice::Pure(1));
        let m = mix_policies(&s, &t, &rat(1, 8));
        assert_eq!(m.choices[&0], Choice::Mixed(vec![(0, rat(7, 8)), (1, rat(1, 8))]));
        assert_eq!(mix_policies(&s, &t, &rat(0, 1)), s);
        assert_eq!(mix_policies(&s, &s, &rat(1, 3)), s);
    }

    #[test]
    fn threshold_formula() {
        let plan = nonstatic_threshold_strategy(&square_branch(), 0.25).unwrap();
        let size = square_branch().encoding_size();
        assert_eq!(plan.threshold, BigUint::one() << ((4 * size + 3) as usize));
        assert_eq!(plan.sigma.pure(0), Some(0));
        assert_eq!(plan.tau.pure(0), Some(1));
    }

    #[test]
    fn queen_and_worker_choices() {
        let plan = queen_worker_strategy(&square_branch()).unwrap();
        assert_eq!(plan.queen.pure(0), Some(0));
        assert_eq!(plan.worker.pure(0), Some(1));
        assert_eq!(plan.zero_set, vec![true, true, false]);
    }
}
