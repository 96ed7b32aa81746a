//! Polynomial-time qualitative analyses: which coordinates of the greatest or least
//! fixed point are exactly 0 or exactly 1, with witnessing strategies.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{and_or_closure, bottom_scc_within, sccs_bottom_up};
use crate::policy::{Choice, Policy};
use crate::pps::{Player, SystemClass};
use crate::simplex::{maximize, LpOutcome};
use crate::snf::{SnfForm, SnfSystem};

#[derive(Clone, Debug)]
pub struct OneSet {
    /// `g*_i = 1` exactly on these variables.
    pub in_set: Vec<bool>,
    /// For each min node outside the set, the successor that joined the deficient set first.
    pub min_witness: Policy,
    /// For each max node inside the set, a successor inside the set.
    pub max_witness: Policy,
}

impl OneSet {
    pub fn members(&self) -> Vec<usize> {
        members(&self.in_set)
    }
}

pub fn members(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&i| mask[i]).collect()
}

fn stamp_of(s: &[Option<u64>], v: usize) -> u64 {
    s[v].unwrap_or(u64::MAX)
}

/// Detects `g*_i = 1` by AND-OR reachability of the deficient variables (affine rows with
/// `P_i(1) < 1`): max nodes need every successor to reach, all other nodes one.
pub fn gfp_one_set(snf: &SnfSystem) -> OneSet {
    let n = snf.len();
    let succ = snf.dependency_graph();
    let is_and: Vec<bool> = snf.forms.iter().map(|f| f.player() == Some(Player::Max)).collect();
    let mut next = 0u64;
    let seeds: Vec<Option<u64>> = snf
        .forms
        .iter()
        .map(|f| {
            if matches!(f, SnfForm::L { .. }) && f.at_one() < BigRational::one() {
                next += 1;
                Some(next - 1)
            } else {
                None
            }
        })
        .collect();
    let reach = and_or_closure(&succ, &is_and, seeds, None, next);
    let mut min_witness = Policy::new(Player::Min);
    let mut max_witness = Policy::new(Player::Max);
    for (i, f) in snf.forms.iter().enumerate() {
        if let SnfForm::M(p, j, k) = *f {
            match (p, reach[i].is_some()) {
                (Player::Min, true) => {
                    let b = if stamp_of(&reach, k) < stamp_of(&reach, j) { 1 } else { 0 };
                    min_witness.set(i, Choice::Pure(b));
                }
                (Player::Max, false) => {
                    let b = if reach[j].is_none() { 0 } else { 1 };
                    max_witness.set(i, Choice::Pure(b));
                }
                _ => {}
            }
        }
    }
    OneSet {
        in_set: (0..n).map(|i| reach[i].is_none()).collect(),
        min_witness,
        max_witness,
    }
}

/// A system with some variables fixed to constants and the rest renumbered.
#[derive(Clone, Debug)]
pub struct Residual {
    pub system: SnfSystem,
    /// Index in the parent system of each remaining variable.
    pub keep: Vec<usize>,
    /// Per parent variable, the constant substituted for it, if any.
    pub fixed: Vec<Option<bool>>,
}

impl Residual {
    pub fn new(parent: &SnfSystem, fixed: Vec<Option<bool>>) -> Residual {
        let (system, keep) = parent.substitute(&fixed);
        Residual { system, keep, fixed }
    }

    /// Expands a residual vector back to the parent, filling fixed coordinates.
    pub fn expand<T: Clone>(&self, values: &[T], fill: &[Option<T>]) -> Vec<T> {
        let mut out: Vec<Option<T>> = fill.to_vec();
        for (r, &p) in self.keep.iter().enumerate() {
            out[p] = Some(values[r].clone());
        }
        out.into_iter()
            .map(|v| v.expect("every coordinate is either kept or fixed"))
            .collect()
    }
}

/// Substitutes 1 for every variable in `one`.
pub fn remove_one_vars(snf: &SnfSystem, one: &[bool]) -> Residual {
    Residual::new(snf, one.iter().map(|&b| b.then_some(true)).collect())
}

/// Substitutes 0 for every variable in `zero`.
pub fn remove_zero_vars(snf: &SnfSystem, zero: &[bool]) -> Residual {
    Residual::new(snf, zero.iter().map(|&b| b.then_some(false)).collect())
}

/// How a zero-set variable reaches a deficient or product variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeStep {
    Leaf,
    Follow(usize),
    Branch(usize, usize),
}

#[derive(Clone, Debug)]
pub struct ZeroSet {
    /// `g*_i = 0` exactly on these variables.
    pub in_set: Vec<bool>,
    /// Min policy keeping the zero set at value 0, agreeing with the one-set witness elsewhere.
    pub tau_star: Policy,
    pub max_witness: Policy,
    /// One step of the witness tree of each zero-set variable; unfolding from `x_i` gives `T_i`.
    pub trees: BTreeMap<usize, TreeStep>,
}

impl ZeroSet {
    pub fn members(&self) -> Vec<usize> {
        members(&self.in_set)
    }

    /// Nodes and edges of the unfolded tree `T_i`, depth first.
    pub fn tree_edges(&self, root: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            match self.trees.get(&v) {
                Some(TreeStep::Follow(c)) => {
                    out.push((v, *c));
                    stack.push(*c);
                }
                Some(TreeStep::Branch(a, b)) => {
                    out.push((v, *a));
                    out.push((v, *b));
                    stack.push(*b);
                    stack.push(*a);
                }
                _ => {}
            }
        }
        out
    }
}

/// Decides `g*_i = 0` on a system whose greatest fixed point is below 1 everywhere,
/// alternating a positivity closure `S` with a closure `F` of variables that can be kept
/// away from 1 until the two cover all variables.
pub fn gfp_zero_set(snf: &SnfSystem) -> Result<ZeroSet> {
    let n = snf.len();
    let one = gfp_one_set(snf);
    if one.in_set.iter().any(|&b| b) {
        return Err(Error::invalid("zero-set analysis expects a system with g* < 1 everywhere"));
    }
    let succ = snf.dependency_graph();
    let s_and: Vec<bool> = snf
        .forms
        .iter()
        .map(|f| matches!(f, SnfForm::Q(..) | SnfForm::M(Player::Min, ..)))
        .collect();
    let f_and: Vec<bool> = snf.forms.iter().map(|f| f.player() == Some(Player::Max)).collect();

    let mut next = 0u64;
    let mut s_stamp: Vec<Option<u64>> = snf
        .forms
        .iter()
        .map(|f| {
            if f.at_zero() > BigRational::zero() {
                next += 1;
                Some(next - 1)
            } else {
                None
            }
        })
        .collect();
    let mut max_witness = Policy::new(Player::Max);
    let f_stamp = loop {
        s_stamp = and_or_closure(&succ, &s_and, s_stamp, None, next);
        next = s_stamp.iter().flatten().max().map_or(next, |m| m + 1).max(next);
        let outside: Vec<bool> = s_stamp.iter().map(|s| s.is_none()).collect();
        let f_seeds: Vec<Option<u64>> = (0..n)
            .map(|i| {
                let f = &snf.forms[i];
                if outside[i] && (f.is_q() || f.at_one() < BigRational::one()) {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect();
        let f_stamp = and_or_closure(&succ, &f_and, f_seeds, Some(&outside), next);
        next = f_stamp.iter().flatten().max().map_or(next, |m| m + 1).max(next);
        let rest: Vec<usize> = (0..n).filter(|&i| s_stamp[i].is_none() && f_stamp[i].is_none()).collect();
        if rest.is_empty() {
            break f_stamp;
        }
        for &i in &rest {
            if let SnfForm::M(Player::Max, j, _) = snf.forms[i] {
                let b = if f_stamp[j].is_none() { 0 } else { 1 };
                max_witness.set(i, Choice::Pure(b));
            }
            s_stamp[i] = Some(next);
            next += 1;
        }
    };

    let mut tau_star = Policy::new(Player::Min);
    let mut trees = BTreeMap::new();
    let earliest = |kids: &[usize]| -> usize {
        *kids
            .iter()
            .min_by_key(|&&c| (stamp_of(&f_stamp, c), c))
            .expect("non-empty successor list")
    };
    for (i, f) in snf.forms.iter().enumerate() {
        let in_f = f_stamp[i].is_some();
        match *f {
            SnfForm::M(Player::Min, j, k) => {
                let c = if in_f {
                    if stamp_of(&f_stamp, k) < stamp_of(&f_stamp, j) { 1 } else { 0 }
                } else {
                    one.min_witness.pure(i).unwrap_or(0)
                };
                tau_star.set(i, Choice::Pure(c));
                if in_f {
                    trees.insert(i, TreeStep::Follow([j, k][c]));
                }
            }
            SnfForm::M(Player::Max, j, k) => {
                if !max_witness.choices.contains_key(&i) {
                    let b = if in_f {
                        0
                    } else if stamp_of(&s_stamp, k) < stamp_of(&s_stamp, j) {
                        1
                    } else {
                        0
                    };
                    max_witness.set(i, Choice::Pure(b));
                }
                if in_f {
                    trees.insert(i, TreeStep::Branch(j, k));
                }
            }
            SnfForm::Q(..) => {
                if in_f {
                    trees.insert(i, TreeStep::Leaf);
                }
            }
            SnfForm::L { .. } => {
                if in_f {
                    if f.at_one() < BigRational::one() {
                        trees.insert(i, TreeStep::Leaf);
                    } else {
                        trees.insert(i, TreeStep::Follow(earliest(&f.children())));
                    }
                }
            }
        }
    }
    Ok(ZeroSet {
        in_set: f_stamp.iter().map(|s| s.is_some()).collect(),
        tau_star,
        max_witness,
        trees,
    })
}

/// Variables with least fixed point exactly 0: the complement of the positivity closure.
pub fn lfp_zero_set(snf: &SnfSystem) -> Vec<bool> {
    let succ = snf.dependency_graph();
    let is_and: Vec<bool> = snf
        .forms
        .iter()
        .map(|f| matches!(f, SnfForm::Q(..) | SnfForm::M(Player::Min, ..)))
        .collect();
    let mut next = 0u64;
    let seeds = snf
        .forms
        .iter()
        .map(|f| {
            if f.at_zero() > BigRational::zero() {
                next += 1;
                Some(next - 1)
            } else {
                None
            }
        })
        .collect();
    and_or_closure(&succ, &is_and, seeds, None, next)
        .into_iter()
        .map(|s| s.is_none())
        .collect()
}

/// Variables of a plain PPS with least fixed point exactly 1, decided component by component
/// from the bottom up; the spectral-radius test is an exact feasibility LP.
pub fn lfp_one_set_pps(snf: &SnfSystem) -> Result<Vec<bool>> {
    if snf.classify() != SystemClass::Pps {
        return Err(Error::invalid("least-fixed-point one-set test needs a system without max/min"));
    }
    let n = snf.len();
    let succ = snf.dependency_graph();
    let mut one = vec![false; n];
    for comp in sccs_bottom_up(&succ) {
        let mut inside = vec![false; n];
        for &v in &comp {
            inside[v] = true;
        }
        let full = comp.iter().all(|&v| snf.forms[v].at_one().is_one());
        let deps_one = comp
            .iter()
            .all(|&v| succ[v].iter().all(|&w| inside[w] || one[w]));
        if !full || !deps_one {
            continue;
        }
        // With outside variables fixed at 1, is the component linear without any inflow?
        let mut nonlinear = false;
        let mut inflow = false;
        for &v in &comp {
            match &snf.forms[v] {
                SnfForm::L { constant, terms } => {
                    if !constant.is_zero() || terms.iter().any(|(w, _)| !inside[*w]) {
                        inflow = true;
                    }
                }
                SnfForm::Q(j, k) => match (inside[*j], inside[*k]) {
                    (true, true) => nonlinear = true,
                    (false, false) => inflow = true,
                    _ => {}
                },
                SnfForm::M(..) => unreachable!("classified as a plain PPS"),
            }
        }
        if !nonlinear && !inflow {
            continue;
        }
        if nonlinear && !spectral_radius_at_most_one(snf, &comp) {
            continue;
        }
        for &v in &comp {
            one[v] = true;
        }
    }
    Ok(one)
}

/// Is there `z ≥ 1` with `B z ≤ z`, `B` the Jacobian at 1 restricted to `comp`?
fn spectral_radius_at_most_one(snf: &SnfSystem, comp: &[usize]) -> bool {
    let m = comp.len();
    let pos = |v: usize| comp.iter().position(|&c| c == v);
    let mut b = vec![vec![BigRational::zero(); m]; m];
    for (r, &v) in comp.iter().enumerate() {
        match &snf.forms[v] {
            SnfForm::L { terms, .. } => {
                for (w, c) in terms {
                    if let Some(k) = pos(*w) {
                        b[r][k] += c;
                    }
                }
            }
            SnfForm::Q(j, k) => {
                for w in [j, k] {
                    if let Some(t) = pos(*w) {
                        b[r][t] += BigRational::one();
                    }
                }
            }
            SnfForm::M(..) => {}
        }
    }
    // z = 1 + w, w ≥ 0:  (B - I) w ≤ (I - B) 1
    let mut a = b.clone();
    let mut rhs = vec![BigRational::zero(); m];
    for r in 0..m {
        a[r][r] -= BigRational::one();
        rhs[r] = -a[r].iter().fold(BigRational::zero(), |s, v| s + v);
    }
    !matches!(maximize(&vec![BigRational::zero(); m], &a, &rhs), LpOutcome::Infeasible)
}

/// Deterministic policies of `player` over its max/min rows, in lexicographic order.
pub fn pure_policies(snf: &SnfSystem, player: Player, budget: usize) -> Result<Vec<Policy>> {
    let nodes: Vec<usize> = (0..snf.len()).filter(|&i| snf.forms[i].player() == Some(player)).collect();
    if nodes.len() >= 63 || (1usize << nodes.len()) > budget {
        return Err(Error::solver(format!(
            "policy enumeration budget exceeded: 2^{} policies, budget {budget}",
            nodes.len()
        )));
    }
    Ok((0..1usize << nodes.len())
        .map(|mask| {
            let mut p = Policy::new(player);
            for (t, &v) in nodes.iter().enumerate() {
                p.set(v, Choice::Pure((mask >> (nodes.len() - 1 - t)) & 1));
            }
            p
        })
        .collect())
}

/// Least-fixed-point one set of a maxPPS (union over max policies) or minPPS
/// (intersection over min policies) by enumerating deterministic policies.
pub fn lfp_one_set_enum(snf: &SnfSystem, budget: usize) -> Result<Vec<bool>> {
    let n = snf.len();
    match snf.classify() {
        SystemClass::Pps => lfp_one_set_pps(snf),
        SystemClass::MaxPps => {
            let mut acc = vec![false; n];
            for p in pure_policies(snf, Player::Max, budget)? {
                for (a, b) in acc.iter_mut().zip(lfp_one_set_pps(&snf.apply_policy(&p)?)?) {
                    *a |= b;
                }
            }
            Ok(acc)
        }
        SystemClass::MinPps => {
            let mut acc = vec![true; n];
            for p in pure_policies(snf, Player::Min, budget)? {
                for (a, b) in acc.iter_mut().zip(lfp_one_set_pps(&snf.apply_policy(&p)?)?) {
                    *a &= b;
                }
            }
            Ok(acc)
        }
        SystemClass::MaxMinPps => Err(Error::Unsupported(
            "least-fixed-point one set of a max-minPPS is not supported".into(),
        )),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdfReport {
    pub ldf: bool,
    /// A closed set the max player can stay in forever, when not LDF.
    pub witness: Option<Vec<usize>>,
}

/// Is `P_{*,τ}` linear-degenerate free: can no max policy produce a closed linear cycle?
/// Pass `tau = None` for systems without min rows.
pub fn is_ldf(snf: &SnfSystem, tau: Option<&Policy>) -> Result<LdfReport> {
    let sys = match tau {
        Some(t) => snf.apply_policy(t)?,
        None => snf.clone(),
    };
    if sys.forms.iter().any(|f| f.player() == Some(Player::Min)) {
        return Err(Error::invalid("LDF test needs a min policy for every min row"));
    }
    let n = sys.len();
    let succ = sys.dependency_graph();
    let is_and: Vec<bool> = sys.forms.iter().map(|f| f.player() == Some(Player::Max)).collect();
    let seeds: Vec<Option<u64>> = sys
        .forms
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let target = match f {
                SnfForm::Q(..) => true,
                SnfForm::L { .. } => f.at_zero() > BigRational::zero() || f.at_one() < BigRational::one(),
                SnfForm::M(..) => false,
            };
            target.then_some(i as u64)
        })
        .collect();
    let reach = and_or_closure(&succ, &is_and, seeds, None, n as u64);
    let stuck: Vec<bool> = reach.iter().map(|r| r.is_none()).collect();
    let witness = bottom_scc_within(&succ, &stuck);
    Ok(LdfReport {
        ldf: witness.is_none(),
        witness,
    })
}

/// Checks the closed-set definition directly on a system without min rows.
pub fn is_closed_set(sys: &SnfSystem, set: &[usize]) -> bool {
    if set.is_empty() {
        return false;
    }
    let n = sys.len();
    let mut inside = vec![false; n];
    for &v in set {
        inside[v] = true;
    }
    let succ = sys.dependency_graph();
    for &v in set {
        match &sys.forms[v] {
            SnfForm::Q(..) | SnfForm::M(Player::Min, ..) => return false,
            f @ SnfForm::L { .. } => {
                if !f.at_zero().is_zero() || !f.at_one().is_one() || !succ[v].iter().all(|&w| inside[w]) {
                    return false;
                }
            }
            SnfForm::M(Player::Max, j, k) => {
                if !inside[*j] && !inside[*k] {
                    return false;
                }
            }
        }
    }
    // strongly connected with at least one edge
    let sub: Vec<Vec<usize>> = (0..n)
        .map(|v| if inside[v] { succ[v].iter().copied().filter(|&w| inside[w]).collect() } else { Vec::new() })
        .collect();
    let comps = sccs_bottom_up(&sub);
    let comp = comps.iter().find(|c| c.contains(&set[0]));
    match comp {
        Some(c) => c.len() == set.len() && set.iter().any(|&v| !sub[v].is_empty()),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn sys(forms: Vec<SnfForm>) -> SnfSystem {
        let names = (0..forms.len()).map(|i| format!("x{i}")).collect();
        SnfSystem::from_forms(names, forms)
    }

    #[test]
    fn one_set_of_square_branch() {
        // a = min(u, b), u = a*a, b = 1/2
        let s = sys(vec![SnfForm::M(Player::Min, 1, 2), SnfForm::Q(0, 0), SnfForm::constant(rat(1, 2))]);
        let o = gfp_one_set(&s);
        assert!(o.members().is_empty());
        assert_eq!(o.min_witness.pure(0), Some(1));
    }

    #[test]
    fn max_node_needs_all_successors() {
        // x = max(x, y), y = 1/2
        let s = sys(vec![SnfForm::M(Player::Max, 0, 1), SnfForm::constant(rat(1, 2))]);
        let o = gfp_one_set(&s);
        assert_eq!(o.members(), vec![0]);
        assert_eq!(o.max_witness.pure(0), Some(0));
    }

    #[test]
    fn zero_set_of_square_branch() {
        let s = sys(vec![SnfForm::M(Player::Min, 1, 2), SnfForm::Q(0, 0), SnfForm::constant(rat(1, 2))]);
        let z = gfp_zero_set(&s).unwrap();
        assert_eq!(z.members(), vec![0, 1]);
        assert_eq!(z.tau_star.pure(0), Some(0));
        assert_eq!(z.trees[&0], TreeStep::Follow(1));
        assert_eq!(z.trees[&1], TreeStep::Leaf);
    }

    #[test]
    fn lfp_one_of_critical_and_supercritical() {
        // x = 1/2 u + 1/2, u = x^2: critical, q* = 1
        let s = sys(vec![SnfForm::linear(rat(1, 2), vec![(1, rat(1, 2))]), SnfForm::Q(0, 0)]);
        assert_eq!(lfp_one_set_pps(&s).unwrap(), vec![true, true]);
        // x = 2/3 u + 1/3: supercritical, q* = 1/2
        let s = sys(vec![SnfForm::linear(rat(1, 3), vec![(1, rat(2, 3))]), SnfForm::Q(0, 0)]);
        assert_eq!(lfp_one_set_pps(&s).unwrap(), vec![false, false]);
    }

    #[test]
    fn product_with_outside_one_is_linear_degenerate() {
        // x = y*w, y = x, w = 1: the cycle {x, y} has no inflow, q* = 0
        let s = sys(vec![SnfForm::Q(1, 2), SnfForm::copy_of(0), SnfForm::constant(rat(1, 1))]);
        assert_eq!(lfp_one_set_pps(&s).unwrap(), vec![false, false, true]);
        assert_eq!(lfp_zero_set(&s), vec![true, true, false]);
    }

    #[test]
    fn ldf_witness_is_closed() {
        // x = max(x, y), y = 1/2
        let s = sys(vec![SnfForm::M(Player::Max, 0, 1), SnfForm::constant(rat(1, 2))]);
        let r = is_ldf(&s, None).unwrap();
        assert!(!r.ldf);
        assert_eq!(r.witness.clone().unwrap(), vec![0]);
        assert!(is_closed_set(&s, &r.witness.unwrap()));
    }
}
