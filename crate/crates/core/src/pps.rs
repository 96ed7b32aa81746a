//! Systems of max/min probabilistic polynomial equations.

use std::collections::{BTreeMap, HashSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::scalar::{format_ratio, int_bitlen, Scalar};

/// `coeff * Π x_v^e` with variables sorted and exponents positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coeff: BigRational,
    pub exps: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn constant(c: BigRational) -> Self {
        Monomial {
            coeff: c,
            exps: Vec::new(),
        }
    }

    pub fn new(coeff: BigRational, exps: Vec<(usize, u32)>) -> Self {
        let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
        for (v, e) in exps {
            if e > 0 {
                *acc.entry(v).or_insert(0) += e;
            }
        }
        Monomial {
            coeff,
            exps: acc.into_iter().collect(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.exps.is_empty()
    }

    /// The variable if this is exactly `1 * x`.
    pub fn as_variable(&self) -> Option<usize> {
        if self.coeff.is_one() && self.exps.len() == 1 && self.exps[0].1 == 1 {
            Some(self.exps[0].0)
        } else {
            None
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = S::from_ratio(&self.coeff);
        for &(v, e) in &self.exps {
            for _ in 0..e {
                acc = acc * x[v].clone();
            }
        }
        acc
    }
}

/// A polynomial with nonnegative coefficients summing to at most one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ProbPoly {
    pub terms: Vec<Monomial>,
}

impl ProbPoly {
    pub fn zero() -> Self {
        ProbPoly { terms: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        ProbPoly::from_terms(vec![Monomial::constant(c)])
    }

    pub fn variable(v: usize) -> Self {
        ProbPoly::from_terms(vec![Monomial::new(BigRational::one(), vec![(v, 1)])])
    }

    /// Merges like monomials, drops zero coefficients and sorts terms canonically.
    pub fn from_terms(terms: Vec<Monomial>) -> Self {
        let mut acc: BTreeMap<Vec<(usize, u32)>, BigRational> = BTreeMap::new();
        for t in terms {
            let e = acc.entry(t.exps).or_insert_with(BigRational::zero);
            *e += t.coeff;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exps, coeff)| Monomial { coeff, exps })
            .collect();
        ProbPoly { terms }
    }

    pub fn coefficient_sum(&self) -> BigRational {
        self.terms.iter().fold(BigRational::zero(), |a, t| a + &t.coeff)
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms
            .iter()
            .find(|t| t.is_constant())
            .map(|t| t.coeff.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn variables(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .terms
            .iter()
            .flat_map(|t| t.exps.iter().map(|&(x, _)| x))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn as_variable(&self) -> Option<usize> {
        if self.terms.len() == 1 {
            self.terms[0].as_variable()
        } else {
            None
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.terms.iter().fold(S::zero(), |a, t| a + t.eval(x))
    }

    fn encoding_size(&self) -> u64 {
        self.terms
            .iter()
            .map(|t| {
                let c = int_bitlen(t.coeff.numer()) + int_bitlen(t.coeff.denom());
                let e: u64 = t
                    .exps
                    .iter()
                    .map(|&(v, e)| {
                        int_bitlen(&(e as u64).into()) + int_bitlen(&((v as u64) + 1).into())
                    })
                    .sum();
                c + e
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Player {
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equation {
    Single(ProbPoly),
    MaxOf(Vec<ProbPoly>),
    MinOf(Vec<ProbPoly>),
}

impl Equation {
    pub fn branches(&self) -> &[ProbPoly] {
        match self {
            Equation::Single(p) => std::slice::from_ref(p),
            Equation::MaxOf(b) | Equation::MinOf(b) => b,
        }
    }

    /// The player choosing among the branches, if there is a real choice.
    pub fn player(&self) -> Option<Player> {
        match self {
            Equation::MaxOf(b) if b.len() >= 2 => Some(Player::Max),
            Equation::MinOf(b) if b.len() >= 2 => Some(Player::Min),
            _ => None,
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Equation::Single(p) => p.eval(x),
            Equation::MaxOf(b) => b
                .iter()
                .map(|p| p.eval(x))
                .reduce(S::max_of)
                .unwrap_or_else(S::zero),
            Equation::MinOf(b) => b
                .iter()
                .map(|p| p.eval(x))
                .reduce(S::min_of)
                .unwrap_or_else(S::zero),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemClass {
    Pps,
    MaxPps,
    MinPps,
    MaxMinPps,
}

impl SystemClass {
    pub fn name(self) -> &'static str {
        match self {
            SystemClass::Pps => "PPS",
            SystemClass::MaxPps => "maxPPS",
            SystemClass::MinPps => "minPPS",
            SystemClass::MaxMinPps => "max-minPPS",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxMinPps {
    pub names: Vec<String>,
    pub equations: Vec<Equation>,
}

impl MaxMinPps {
    pub fn new(names: Vec<String>, equations: Vec<Equation>) -> Self {
        MaxMinPps { names, equations }
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn classify(&self) -> SystemClass {
        let has_max = self.equations.iter().any(|e| e.player() == Some(Player::Max));
        let has_min = self.equations.iter().any(|e| e.player() == Some(Player::Min));
        match (has_max, has_min) {
            (false, false) => SystemClass::Pps,
            (true, false) => SystemClass::MaxPps,
            (false, true) => SystemClass::MinPps,
            (true, true) => SystemClass::MaxMinPps,
        }
    }

    /// Checks the probabilistic shape of every polynomial; all problems are reported.
    pub fn validate(&self) -> Result<()> {
        let n = self.equations.len();
        let mut diags = Vec::new();
        if self.names.len() != n {
            diags.push(Diagnostic {
                equation: None,
                message: format!("{} names for {} equations", self.names.len(), n),
            });
        }
        let mut seen = HashSet::new();
        for (i, name) in self.names.iter().enumerate() {
            if !seen.insert(name.as_str()) {
                diags.push(Diagnostic {
                    equation: Some(i),
                    message: format!("duplicate variable name {name} at equation {i}"),
                });
            }
        }
        for (i, eq) in self.equations.iter().enumerate() {
            let branches = eq.branches();
            if branches.is_empty() {
                let kind = if matches!(eq, Equation::MaxOf(_)) { "max" } else { "min" };
                diags.push(Diagnostic {
                    equation: Some(i),
                    message: format!("empty {kind} at equation {i}"),
                });
            }
            for p in branches {
                for t in &p.terms {
                    if t.coeff < BigRational::zero() {
                        diags.push(Diagnostic {
                            equation: Some(i),
                            message: format!(
                                "negative coefficient {} at equation {i}",
                                format_ratio(&t.coeff)
                            ),
                        });
                    }
                    for &(v, _) in &t.exps {
                        if v >= n {
                            diags.push(Diagnostic {
                                equation: Some(i),
                                message: format!("variable index {v} out of range at equation {i}"),
                            });
                        }
                    }
                }
                let s = p.coefficient_sum();
                if s > BigRational::one() {
                    diags.push(Diagnostic {
                        equation: Some(i),
                        message: format!("coefficient sum {} > 1 at equation {i}", format_ratio(&s)),
                    });
                }
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(diags))
        }
    }

    /// Bit length of the system: coefficient bits, exponent and index bits,
    /// plus one per equation and one per branch.
    pub fn encoding_size(&self) -> u64 {
        self.equations
            .iter()
            .map(|eq| {
                let b = eq.branches();
                1 + b.len() as u64 + b.iter().map(ProbPoly::encoding_size).sum::<u64>()
            })
            .sum()
    }

    pub fn evaluate<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.equations.iter().map(|e| e.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn single(terms: Vec<Monomial>) -> Equation {
        Equation::Single(ProbPoly::from_terms(terms))
    }

    #[test]
    fn encoding_size_of_constant_and_identity() {
        let p = MaxMinPps::new(vec!["x".into()], vec![single(vec![Monomial::constant(rat(1, 2))])]);
        assert_eq!(p.encoding_size(), 5);
        let p = MaxMinPps::new(vec!["x".into()], vec![Equation::Single(ProbPoly::variable(0))]);
        assert_eq!(p.encoding_size(), 6);
    }

    #[test]
    fn sum_above_one_is_rejected() {
        let p = MaxMinPps::new(
            vec!["x".into()],
            vec![single(vec![
                Monomial::new(rat(3, 4), vec![(0, 2)]),
                Monomial::constant(rat(1, 2)),
            ])],
        );
        match p.validate() {
            Err(Error::Validation(d)) => {
                assert_eq!(d[0].message, "coefficient sum 5/4 > 1 at equation 0")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_min_is_rejected() {
        let p = MaxMinPps::new(vec!["x".into()], vec![Equation::MinOf(vec![])]);
        match p.validate() {
            Err(Error::Validation(d)) => assert!(d[0].message.contains("empty min")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn like_terms_merge() {
        let p = ProbPoly::from_terms(vec![
            Monomial::new(rat(1, 4), vec![(1, 1), (0, 1)]),
            Monomial::new(rat(1, 4), vec![(0, 1), (1, 1)]),
            Monomial::constant(rat(0, 1)),
        ]);
        assert_eq!(p.terms.len(), 1);
        assert_eq!(p.terms[0].coeff, rat(1, 2));
    }

    #[test]
    fn classification() {
        let v = |i| ProbPoly::variable(i);
        let p = MaxMinPps::new(
            vec!["a".into(), "b".into()],
            vec![Equation::MinOf(vec![v(0), v(1)]), Equation::MaxOf(vec![v(0)])],
        );
        assert_eq!(p.classify(), SystemClass::MinPps);
    }
}
