//! Positional strategies: one (possibly randomized) branch choice per controlled variable.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::pps::Player;
use crate::scalar::format_ratio;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    Pure(usize),
    /// Branch index with positive weight; weights sum to one.
    Mixed(Vec<(usize, BigRational)>),
}

impl Choice {
    /// Merges repeated branches, drops zero weights and collapses point masses.
    pub fn mixed(weights: Vec<(usize, BigRational)>) -> Choice {
        let mut acc: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (b, w) in weights {
            *acc.entry(b).or_insert_with(BigRational::zero) += w;
        }
        let v: Vec<(usize, BigRational)> = acc.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        if v.len() == 1 {
            Choice::Pure(v[0].0)
        } else {
            Choice::Mixed(v)
        }
    }

    pub fn weights(&self) -> Vec<(usize, BigRational)> {
        match self {
            Choice::Pure(b) => vec![(*b, BigRational::one())],
            Choice::Mixed(w) => w.clone(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Choice::Pure(_))
    }

    pub fn check(&self, arity: usize) -> Result<()> {
        match self {
            Choice::Pure(b) if *b < arity => Ok(()),
            Choice::Pure(b) => Err(Error::invalid(format!("branch {b} out of range (arity {arity})"))),
            Choice::Mixed(w) => {
                let mut sum = BigRational::zero();
                for (b, p) in w {
                    if *b >= arity {
                        return Err(Error::invalid(format!("branch {b} out of range (arity {arity})")));
                    }
                    if *p <= BigRational::zero() {
                        return Err(Error::invalid(format!("non-positive weight {}", format_ratio(p))));
                    }
                    sum += p;
                }
                if !sum.is_one() {
                    return Err(Error::invalid(format!("weights sum to {}", format_ratio(&sum))));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    pub player: Player,
    pub choices: BTreeMap<usize, Choice>,
}

impl Policy {
    pub fn new(player: Player) -> Self {
        Policy {
            player,
            choices: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, var: usize, choice: Choice) {
        self.choices.insert(var, choice);
    }

    pub fn pure(&self, var: usize) -> Option<usize> {
        match self.choices.get(&var) {
            Some(Choice::Pure(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.choices.values().all(Choice::is_pure)
    }
}
