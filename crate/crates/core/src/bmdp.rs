//! Branching Markov decision processes and simple stochastic games with a reachability target.

use std::collections::HashSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Diagnostic, Error, Result};
use crate::gnm::{solve_gfp_snf, Mode, SolveOptions, ValueVector};
use crate::pps::{Equation, MaxMinPps, Monomial, ProbPoly, SystemClass};
use crate::qualitative::{gfp_one_set, gfp_zero_set, remove_one_vars};
use crate::scalar::{format_ratio, Scalar};
use crate::snf::{to_snf, SnfSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Owner {
    ReachMaximizer,
    ReachMinimizer,
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub prob: BigRational,
    /// Offspring type indices in output order; repeated entries mean several children.
    pub offspring: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub rules: Vec<Rule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub owner: Owner,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bssg {
    pub types: Vec<TypeDef>,
    pub targets: Vec<usize>,
}

impl Bssg {
    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|t| t.name == name)
    }

    pub fn is_target(&self, t: usize) -> bool {
        self.targets.contains(&t)
    }

    pub fn validate(&self) -> Result<()> {
        let mut d = Vec::new();
        let mut push = |m: String| d.push(Diagnostic { equation: None, message: m });
        let mut seen = HashSet::new();
        for t in &self.types {
            if !seen.insert(t.name.as_str()) {
                push(format!("duplicate type name {}", t.name));
            }
        }
        if self.targets.is_empty() {
            push("no target type declared".into());
        }
        for &t in &self.targets {
            if t >= self.types.len() {
                push(format!("target index {t} out of range"));
            }
        }
        for (i, t) in self.types.iter().enumerate() {
            if self.is_target(i) {
                continue;
            }
            if t.actions.is_empty() {
                push(format!("type {} has no actions", t.name));
            }
            if t.owner == Owner::Random && t.actions.len() > 1 {
                push(format!("random type {} has {} actions", t.name, t.actions.len()));
            }
            for a in &t.actions {
                let mut sum = BigRational::zero();
                for r in &a.rules {
                    if r.prob <= BigRational::zero() {
                        push(format!("non-positive probability in {} -{}->", t.name, a.name));
                    }
                    for &o in &r.offspring {
                        if o >= self.types.len() {
                            push(format!("offspring index {o} out of range in {}", t.name));
                        }
                    }
                    sum += &r.prob;
                }
                if !sum.is_one() {
                    push(format!(
                        "rule probabilities of {} -{}-> sum to {}",
                        t.name,
                        a.name,
                        format_ratio(&sum)
                    ));
                }
            }
        }
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(d))
        }
    }
}

/// Non-reachability system: one variable per non-target type.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub pps: MaxMinPps,
    pub var_of_type: Vec<Option<usize>>,
    pub type_of_var: Vec<usize>,
}

/// Builds the system whose greatest fixed point is the optimal non-reachability value.
/// The reach-maximizer becomes the min player and the reach-minimizer the max player.
pub fn to_nonreach_pps(model: &Bssg) -> Result<Reduction> {
    model.validate()?;
    let mut var_of_type = vec![None; model.types.len()];
    let mut type_of_var = Vec::new();
    for t in 0..model.types.len() {
        if !model.is_target(t) {
            var_of_type[t] = Some(type_of_var.len());
            type_of_var.push(t);
        }
    }
    let mut equations = Vec::with_capacity(type_of_var.len());
    for &t in &type_of_var {
        let td = &model.types[t];
        let branches: Vec<ProbPoly> = td
            .actions
            .iter()
            .map(|a| {
                let terms = a
                    .rules
                    .iter()
                    .filter(|r| !r.offspring.iter().any(|&o| model.is_target(o)))
                    .map(|r| {
                        let exps = r.offspring.iter().map(|&o| (var_of_type[o].expect("non-target"), 1)).collect();
                        Monomial::new(r.prob.clone(), exps)
                    })
                    .collect();
                ProbPoly::from_terms(terms)
            })
            .collect();
        equations.push(match td.owner {
            Owner::ReachMaximizer => Equation::MinOf(branches),
            Owner::ReachMinimizer => Equation::MaxOf(branches),
            Owner::Random => Equation::Single(branches.into_iter().next().unwrap_or_default()),
        });
    }
    let names = type_of_var.iter().map(|&t| model.types[t].name.clone()).collect();
    Ok(Reduction {
        pps: MaxMinPps::new(names, equations),
        var_of_type,
        type_of_var,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ReachClass {
    /// Reachable with probability 1 (non-reachability value 0).
    Sure,
    /// Unreachable (non-reachability value 1).
    Never,
    Between,
}

#[derive(Clone, Debug)]
pub struct QualitativeReport {
    pub class: SystemClass,
    /// Per type, in declaration order; target types are `Sure`.
    pub per_type: Vec<ReachClass>,
}

/// Which types reach the target with optimal probability 0 or 1.
pub fn qualitative_reach(model: &Bssg) -> Result<QualitativeReport> {
    let red = to_nonreach_pps(model)?;
    let snf = to_snf(&red.pps)?;
    let one = gfp_one_set(&snf);
    let res = remove_one_vars(&snf, &one.in_set);
    let zero = gfp_zero_set(&res.system)?;
    let mut in_zero = vec![false; snf.len()];
    for (r, &p) in res.keep.iter().enumerate() {
        in_zero[p] = zero.in_set[r];
    }
    let per_type = (0..model.types.len())
        .map(|t| match red.var_of_type[t] {
            None => ReachClass::Sure,
            Some(v) => {
                let s = snf.origin[v];
                if one.in_set[s] {
                    ReachClass::Never
                } else if in_zero[s] {
                    ReachClass::Sure
                } else {
                    ReachClass::Between
                }
            }
        })
        .collect();
    Ok(QualitativeReport {
        class: snf.classify(),
        per_type,
    })
}

#[derive(Clone, Debug)]
pub struct ReachReport {
    pub class: SystemClass,
    pub reduction: Reduction,
    pub snf: SnfSystem,
    /// Greatest fixed point on every normal-form variable.
    pub snf_values: ValueVector,
    /// Non-reachability value per non-target type.
    pub nonreach: ValueVector,
    /// Optimal reachability probability per type in declaration order.
    pub reach: Vec<f64>,
    pub iterations: usize,
}

/// Optimal reachability probabilities of a BMDP (one controller).
pub fn reachability_values(model: &Bssg, opts: &SolveOptions) -> Result<ReachReport> {
    let red = to_nonreach_pps(model)?;
    let snf = to_snf(&red.pps)?;
    if snf.classify() == SystemClass::MaxMinPps {
        return Err(Error::Unsupported(
            "game with both controllers: use qualitative analysis or certify a policy pair".into(),
        ));
    }
    let (snf_values, iterations) = match opts.mode {
        Mode::Exact => {
            let s = solve_gfp_snf::<BigRational>(&snf, opts)?;
            (ValueVector::Exact(s.values), s.iterations)
        }
        Mode::Float => {
            let s = solve_gfp_snf::<f64>(&snf, opts)?;
            (ValueVector::Float(s.values), s.iterations)
        }
    };
    let (nonreach, g) = match &snf_values {
        ValueVector::Exact(v) => {
            let p = snf.project(v);
            let f = p.iter().map(Scalar::to_f64).collect::<Vec<_>>();
            (ValueVector::Exact(p), f)
        }
        ValueVector::Float(v) => {
            let p = snf.project(v);
            (ValueVector::Float(p.clone()), p)
        }
    };
    let reach = (0..model.types.len())
        .map(|t| red.var_of_type[t].map_or(1.0, |v| 1.0 - g[v]))
        .collect();
    Ok(ReachReport {
        class: snf.classify(),
        reduction: red,
        snf,
        snf_values,
        nonreach,
        reach,
        iterations,
    })
}

/// Reach probability of a starting population from per-type non-reach values.
pub fn population_reach(model: &Bssg, red: &Reduction, g: &[f64], counts: &[usize]) -> f64 {
    let mut nonreach = 1.0;
    for (t, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        match red.var_of_type[t] {
            None => return if model.is_target(t) { 1.0 } else { 0.0 },
            Some(v) => nonreach *= g[v].powi(c as i32),
        }
    }
    1.0 - nonreach
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    /// A -> A A | A -> B ; B -> C (1/2) | nothing (1/2); target C
    fn square_branch() -> Bssg {
        Bssg {
            types: vec![
                TypeDef {
                    name: "A".into(),
                    owner: Owner::ReachMaximizer,
                    actions: vec![
                        Action { name: "split".into(), rules: vec![Rule { prob: rat(1, 1), offspring: vec![0, 0] }] },
                        Action { name: "become".into(), rules: vec![Rule { prob: rat(1, 1), offspring: vec![1] }] },
                    ],
                },
                TypeDef {
                    name: "B".into(),
                    owner: Owner::Random,
                    actions: vec![Action {
                        name: "go".into(),
                        rules: vec![
                            Rule { prob: rat(1, 2), offspring: vec![2] },
                            Rule { prob: rat(1, 2), offspring: vec![] },
                        ],
                    }],
                },
                TypeDef { name: "C".into(), owner: Owner::Random, actions: vec![] },
            ],
            targets: vec![2],
        }
    }

    #[test]
    fn reduction_shape() {
        let r = to_nonreach_pps(&square_branch()).unwrap();
        assert_eq!(r.pps.names, vec!["A", "B"]);
        match &r.pps.equations[0] {
            Equation::MinOf(b) => {
                assert_eq!(b[0].terms[0].exps, vec![(0, 2)]);
                assert_eq!(b[1], ProbPoly::variable(1));
            }
            e => panic!("{e:?}"),
        }
        assert_eq!(r.pps.equations[1], Equation::Single(ProbPoly::constant(rat(1, 2))));
    }

    #[test]
    fn values_and_classes() {
        let m = square_branch();
        let rep = reachability_values(&m, &SolveOptions::with_eps(1e-9)).unwrap();
        assert!((rep.reach[0] - 1.0).abs() < 1e-9);
        assert!((rep.reach[1] - 0.5).abs() < 1e-9);
        let q = qualitative_reach(&m).unwrap();
        assert_eq!(q.per_type, vec![ReachClass::Sure, ReachClass::Between, ReachClass::Sure]);
    }

    #[test]
    fn bad_probabilities_rejected() {
        let mut m = square_branch();
        m.types[1].actions[0].rules[0].prob = rat(1, 6);
        assert!(matches!(m.validate(), Err(Error::Validation(_))));
    }
}
