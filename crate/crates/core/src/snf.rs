//! Simple normal form: every equation is affine, a product of two variables,
//! or a max/min of two variables.

use std::collections::{BTreeMap, HashSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::policy::{Choice, Policy};
use crate::pps::{Equation, MaxMinPps, Monomial, Player, ProbPoly, SystemClass};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SnfForm {
    /// `constant + Σ coeff * x_var`, coefficients positive, summing with the constant to at most one.
    L {
        constant: BigRational,
        terms: Vec<(usize, BigRational)>,
    },
    Q(usize, usize),
    M(Player, usize, usize),
}

impl SnfForm {
    pub fn linear(constant: BigRational, terms: Vec<(usize, BigRational)>) -> SnfForm {
        let mut acc: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (v, c) in terms {
            *acc.entry(v).or_insert_with(BigRational::zero) += c;
        }
        SnfForm::L {
            constant,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn constant(c: BigRational) -> SnfForm {
        SnfForm::L {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn copy_of(v: usize) -> SnfForm {
        SnfForm::L {
            constant: BigRational::zero(),
            terms: vec![(v, BigRational::one())],
        }
    }

    pub fn children(&self) -> Vec<usize> {
        match self {
            SnfForm::L { terms, .. } => terms.iter().map(|(v, _)| *v).collect(),
            SnfForm::Q(j, k) | SnfForm::M(_, j, k) => {
                if j == k {
                    vec![*j]
                } else {
                    vec![*j, *k]
                }
            }
        }
    }

    /// Value of the right-hand side at the all-ones vector.
    pub fn at_one(&self) -> BigRational {
        match self {
            SnfForm::L { constant, terms } => {
                terms.iter().fold(constant.clone(), |a, (_, c)| a + c)
            }
            _ => BigRational::one(),
        }
    }

    /// Value of the right-hand side at the zero vector.
    pub fn at_zero(&self) -> BigRational {
        match self {
            SnfForm::L { constant, .. } => constant.clone(),
            _ => BigRational::zero(),
        }
    }

    pub fn is_q(&self) -> bool {
        matches!(self, SnfForm::Q(..))
    }

    pub fn player(&self) -> Option<Player> {
        match self {
            SnfForm::M(p, ..) => Some(*p),
            _ => None,
        }
    }
}

/// How an original max/min equation with `m` branches is laid out as a chain of binary nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceChain {
    pub player: Player,
    /// `nodes[0]` is the original variable; node `t` chooses between `targets[t]` and `nodes[t+1]`.
    pub nodes: Vec<usize>,
    /// The variable standing for each original branch.
    pub targets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfSystem {
    pub names: Vec<String>,
    pub forms: Vec<SnfForm>,
    /// Original variable index to its index here.
    pub origin: Vec<usize>,
    /// Indexed by original variable; present for max/min equations with two or more branches.
    pub chains: Vec<Option<ChoiceChain>>,
}

enum Work {
    Poly(ProbPoly),
    Prod(Vec<usize>),
    Mx(Player, Vec<usize>),
}

struct Builder {
    work: Vec<Work>,
    owner: Vec<usize>,
    names: Vec<String>,
    taken: HashSet<String>,
    counter: usize,
}

impl Builder {
    fn fresh(&mut self, owner: usize, w: Work) -> usize {
        let name = loop {
            let candidate = format!("_aux{}", self.counter);
            self.counter += 1;
            if !self.taken.contains(&candidate) {
                break candidate;
            }
        };
        self.taken.insert(name.clone());
        self.names.push(name);
        self.work.push(w);
        self.owner.push(owner);
        self.work.len() - 1
    }
}

fn is_pure_product(p: &ProbPoly) -> bool {
    p.terms.len() == 1 && p.terms[0].coeff.is_one() && !p.terms[0].is_constant()
}

/// Rewrites a validated system into simple normal form.
///
/// Auxiliary variables are named `_aux<k>` in creation order and placed directly after
/// the original variable whose equation introduced them.
pub fn to_snf(pps: &MaxMinPps) -> Result<SnfSystem> {
    pps.validate()?;
    let n = pps.len();
    let mut b = Builder {
        work: Vec::with_capacity(n),
        owner: (0..n).collect(),
        names: pps.names.clone(),
        taken: pps.names.iter().cloned().collect(),
        counter: 0,
    };
    for eq in &pps.equations {
        let w = match eq {
            Equation::Single(p) => Work::Poly(p.clone()),
            Equation::MaxOf(br) | Equation::MinOf(br) if br.len() == 1 => Work::Poly(br[0].clone()),
            Equation::MaxOf(_) | Equation::MinOf(_) => Work::Mx(Player::Max, Vec::new()),
        };
        b.work.push(w);
    }

    // Non-variable branches become fresh variables.
    for i in 0..n {
        let player = match pps.equations[i].player() {
            Some(p) => p,
            None => continue,
        };
        let mut children = Vec::new();
        for br in pps.equations[i].branches() {
            match br.as_variable() {
                Some(v) => children.push(v),
                None => children.push(b.fresh(i, Work::Poly(br.clone()))),
            }
        }
        b.work[i] = Work::Mx(player, children);
    }

    // Max/min of more than two arguments becomes a chain of binary nodes.
    let mut chains: Vec<Option<ChoiceChain>> = vec![None; n];
    for i in 0..n {
        let (player, children) = match &b.work[i] {
            Work::Mx(p, c) => (*p, c.clone()),
            _ => continue,
        };
        let m = children.len();
        let mut nodes = vec![i];
        for _ in 0..m.saturating_sub(2) {
            let v = b.fresh(i, Work::Mx(player, Vec::new()));
            nodes.push(v);
        }
        for t in 0..nodes.len() {
            let right = if t + 1 < nodes.len() { nodes[t + 1] } else { children[m - 1] };
            b.work[nodes[t]] = Work::Mx(player, vec![children[t], right]);
        }
        chains[i] = Some(ChoiceChain {
            player,
            nodes,
            targets: children,
        });
    }

    // Non-linear monomials of mixed polynomials become fresh variables.
    let mut v = 0;
    while v < b.work.len() {
        if let Work::Poly(p) = &b.work[v] {
            let trivial = p.terms.is_empty()
                || (p.terms.len() == 1 && (p.terms[0].is_constant() || p.terms[0].coeff.is_one()));
            if !trivial {
                let p = p.clone();
                let mut terms = Vec::with_capacity(p.terms.len());
                for t in p.terms {
                    if t.degree() >= 2 {
                        let owner = b.owner[v];
                        let aux = b.fresh(
                            owner,
                            Work::Poly(ProbPoly::from_terms(vec![Monomial {
                                coeff: BigRational::one(),
                                exps: t.exps.clone(),
                            }])),
                        );
                        terms.push(Monomial::new(t.coeff, vec![(aux, 1)]));
                    } else {
                        terms.push(t);
                    }
                }
                b.work[v] = Work::Poly(ProbPoly::from_terms(terms));
            }
        }
        v += 1;
    }

    // Exponent binarization for variables raised to a power of three or more.
    let mut max_exp: BTreeMap<usize, u32> = BTreeMap::new();
    for w in &b.work {
        if let Work::Poly(p) = w {
            if is_pure_product(p) {
                for &(x, e) in &p.terms[0].exps {
                    let m = max_exp.entry(x).or_insert(0);
                    *m = (*m).max(e);
                }
            }
        }
    }
    let mut squares: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&x, &e) in &max_exp {
        if e < 3 {
            continue;
        }
        let k = 31 - e.leading_zeros();
        let mut chain = Vec::with_capacity(k as usize);
        let mut prev = x;
        for _ in 0..k {
            let owner = b.owner[x];
            let s = b.fresh(owner, Work::Prod(vec![prev, prev]));
            chain.push(s);
            prev = s;
        }
        squares.insert(x, chain);
    }
    for w in b.work.iter_mut() {
        let factors = match w {
            Work::Poly(p) if is_pure_product(p) => {
                let mut f = Vec::new();
                for &(x, e) in &p.terms[0].exps {
                    match squares.get(&x) {
                        Some(chain) if e >= 2 => {
                            if e & 1 == 1 {
                                f.push(x);
                            }
                            for (bit, &s) in chain.iter().enumerate() {
                                if (e >> (bit + 1)) & 1 == 1 {
                                    f.push(s);
                                }
                            }
                        }
                        _ => f.extend(std::iter::repeat(x).take(e as usize)),
                    }
                }
                f
            }
            _ => continue,
        };
        *w = Work::Prod(factors);
    }

    // Products of more than two factors become a chain of binary products.
    let mut v = 0;
    while v < b.work.len() {
        if let Work::Prod(f) = &b.work[v] {
            if f.len() > 2 {
                let f = f.clone();
                let owner = b.owner[v];
                let mut cur = v;
                for t in 0..f.len() - 2 {
                    let rest = if t + 1 == f.len() - 2 {
                        vec![f[t + 1], f[t + 2]]
                    } else {
                        Vec::new()
                    };
                    let next = b.fresh(owner, Work::Prod(rest));
                    b.work[cur] = Work::Prod(vec![f[t], next]);
                    cur = next;
                }
            }
        }
        v += 1;
    }

    // Lay variables out grouped by owner, then renumber.
    let total = b.work.len();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by_key(|&w| (b.owner[w], w));
    let mut pos = vec![0usize; total];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let mut forms = Vec::with_capacity(total);
    let mut names = Vec::with_capacity(total);
    for &old in &order {
        names.push(b.names[old].clone());
        let f = match &b.work[old] {
            Work::Poly(p) => {
                let mut constant = BigRational::zero();
                let mut terms = Vec::new();
                for t in &p.terms {
                    match t.exps.as_slice() {
                        [] => constant += &t.coeff,
                        [(x, 1)] => terms.push((pos[*x], t.coeff.clone())),
                        _ => {
                            return Err(Error::solver(
                                "normal form rewriting left a non-linear polynomial",
                            ))
                        }
                    }
                }
                SnfForm::linear(constant, terms)
            }
            Work::Prod(f) => match f.as_slice() {
                [a] => SnfForm::copy_of(pos[*a]),
                [a, c] => SnfForm::Q(pos[*a], pos[*c]),
                _ => return Err(Error::solver("normal form rewriting left a long product")),
            },
            Work::Mx(p, c) => SnfForm::M(*p, pos[c[0]], pos[c[1]]),
        };
        forms.push(f);
    }
    let chains = chains
        .into_iter()
        .map(|c| {
            c.map(|c| ChoiceChain {
                player: c.player,
                nodes: c.nodes.iter().map(|&x| pos[x]).collect(),
                targets: c.targets.iter().map(|&x| pos[x]).collect(),
            })
        })
        .collect();
    Ok(SnfSystem {
        names,
        forms,
        origin: (0..n).map(|i| pos[i]).collect(),
        chains,
    })
}

/// Compiled right-hand sides with coefficients converted to the working scalar.
#[derive(Clone, Debug)]
pub enum CForm<S> {
    L(S, Vec<(usize, S)>),
    Q(usize, usize),
    M(Player, usize, usize),
}

#[derive(Clone, Debug)]
pub struct Compiled<S> {
    pub forms: Vec<CForm<S>>,
}

impl<S: Scalar> Compiled<S> {
    pub fn eval_row(&self, i: usize, x: &[S]) -> S {
        match &self.forms[i] {
            CForm::L(c, t) => t.iter().fold(c.clone(), |a, (v, k)| a + k.clone() * x[*v].clone()),
            CForm::Q(j, k) => x[*j].clone() * x[*k].clone(),
            CForm::M(Player::Max, j, k) => S::max_of(x[*j].clone(), x[*k].clone()),
            CForm::M(Player::Min, j, k) => S::min_of(x[*j].clone(), x[*k].clone()),
        }
    }

    pub fn eval(&self, x: &[S]) -> Vec<S> {
        (0..self.forms.len()).map(|i| self.eval_row(i, x)).collect()
    }
}

/// Affine row of a linearized system, or an untouched max/min row.
#[derive(Clone, Debug)]
pub enum LinRow<S> {
    Affine(S, Vec<(usize, S)>),
    M(Player, usize, usize),
}

impl SnfSystem {
    /// Wraps forms that are already in normal form; the original variables are all of them.
    pub fn from_forms(names: Vec<String>, forms: Vec<SnfForm>) -> Self {
        let n = forms.len();
        SnfSystem {
            names,
            forms,
            origin: (0..n).collect(),
            chains: vec![None; n],
        }
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn num_original(&self) -> usize {
        self.origin.len()
    }

    pub fn classify(&self) -> SystemClass {
        let has = |p| self.forms.iter().any(|f| f.player() == Some(p));
        match (has(Player::Max), has(Player::Min)) {
            (false, false) => SystemClass::Pps,
            (true, false) => SystemClass::MaxPps,
            (false, true) => SystemClass::MinPps,
            (true, true) => SystemClass::MaxMinPps,
        }
    }

    pub fn compile<S: Scalar>(&self) -> Compiled<S> {
        let forms = self
            .forms
            .iter()
            .map(|f| match f {
                SnfForm::L { constant, terms } => CForm::L(
                    S::from_ratio(constant),
                    terms.iter().map(|(v, c)| (*v, S::from_ratio(c))).collect(),
                ),
                SnfForm::Q(j, k) => CForm::Q(*j, *k),
                SnfForm::M(p, j, k) => CForm::M(*p, *j, *k),
            })
            .collect();
        Compiled { forms }
    }

    pub fn evaluate<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.compile::<S>().eval(x)
    }

    /// Equivalent polynomial system, one equation per normal-form variable.
    pub fn to_pps(&self) -> MaxMinPps {
        let var = |v: usize| ProbPoly::variable(v);
        let equations = self
            .forms
            .iter()
            .map(|f| match f {
                SnfForm::L { constant, terms } => {
                    let mut m = vec![Monomial::constant(constant.clone())];
                    m.extend(terms.iter().map(|(v, c)| Monomial::new(c.clone(), vec![(*v, 1)])));
                    Equation::Single(ProbPoly::from_terms(m))
                }
                SnfForm::Q(j, k) => Equation::Single(ProbPoly::from_terms(vec![Monomial::new(
                    BigRational::one(),
                    vec![(*j, 1), (*k, 1)],
                )])),
                SnfForm::M(Player::Max, j, k) => Equation::MaxOf(vec![var(*j), var(*k)]),
                SnfForm::M(Player::Min, j, k) => Equation::MinOf(vec![var(*j), var(*k)]),
            })
            .collect();
        MaxMinPps::new(self.names.clone(), equations)
    }

    pub fn encoding_size(&self) -> u64 {
        self.to_pps().encoding_size()
    }

    pub fn successors(&self, i: usize) -> Vec<usize> {
        self.forms[i].children()
    }

    pub fn dependency_graph(&self) -> Vec<Vec<usize>> {
        (0..self.len()).map(|i| self.successors(i)).collect()
    }

    /// Partial derivatives `∂P_i/∂x_j` at `x`; a max/min row differentiates its selected child.
    pub fn jacobian<S: Scalar>(&self, x: &[S]) -> Vec<Vec<S>> {
        let n = self.len();
        let mut b = vec![vec![S::zero(); n]; n];
        for (i, f) in self.forms.iter().enumerate() {
            match f {
                SnfForm::L { terms, .. } => {
                    for (v, c) in terms {
                        b[i][*v] = b[i][*v].clone() + S::from_ratio(c);
                    }
                }
                SnfForm::Q(j, k) => {
                    b[i][*j] = b[i][*j].clone() + x[*k].clone();
                    b[i][*k] = b[i][*k].clone() + x[*j].clone();
                }
                SnfForm::M(p, j, k) => {
                    let pick_k = match p {
                        Player::Max => x[*k] > x[*j],
                        Player::Min => x[*k] < x[*j],
                    };
                    let c = if pick_k { *k } else { *j };
                    b[i][c] = S::one();
                }
            }
        }
        b
    }

    /// First-order expansion at `y`: products `x_j x_k` become `y_j x_k + x_j y_k - y_j y_k`.
    pub fn linearize<S: Scalar>(&self, y: &[S]) -> Vec<LinRow<S>> {
        self.forms
            .iter()
            .map(|f| match f {
                SnfForm::L { constant, terms } => LinRow::Affine(
                    S::from_ratio(constant),
                    terms.iter().map(|(v, c)| (*v, S::from_ratio(c))).collect(),
                ),
                SnfForm::Q(j, k) => {
                    let c = -(y[*j].clone() * y[*k].clone());
                    if j == k {
                        LinRow::Affine(c, vec![(*j, y[*j].clone() + y[*j].clone())])
                    } else {
                        LinRow::Affine(c, vec![(*k, y[*j].clone()), (*j, y[*k].clone())])
                    }
                }
                SnfForm::M(p, j, k) => LinRow::M(*p, *j, *k),
            })
            .collect()
    }

    /// Checks that `policy` names a valid choice for every max/min row of its player.
    pub fn check_policy(&self, policy: &Policy) -> Result<()> {
        for (&v, c) in &policy.choices {
            match self.forms.get(v) {
                Some(SnfForm::M(p, ..)) if *p == policy.player => c.check(2)?,
                _ => {
                    return Err(Error::invalid(format!(
                        "policy entry for {} which is not a {:?} variable",
                        self.names.get(v).map(String::as_str).unwrap_or("?"),
                        policy.player
                    )))
                }
            }
        }
        for (i, f) in self.forms.iter().enumerate() {
            if f.player() == Some(policy.player) && !policy.choices.contains_key(&i) {
                return Err(Error::invalid(format!("policy missing choice for variable {}", self.names[i])));
            }
        }
        Ok(())
    }

    /// Replaces every max/min row of the policy's player by the chosen (mixture of) children.
    pub fn apply_policy(&self, policy: &Policy) -> Result<SnfSystem> {
        self.check_policy(policy)?;
        let mut out = self.clone();
        for (&v, c) in &policy.choices {
            if let SnfForm::M(_, j, k) = self.forms[v] {
                let kids = [j, k];
                let terms = c.weights().into_iter().map(|(b, w)| (kids[b], w)).collect();
                out.forms[v] = SnfForm::linear(BigRational::zero(), terms);
            }
        }
        Ok(out)
    }

    /// Translates a policy on original max/min equations (branch indices) to the binary nodes.
    pub fn lift_policy(&self, policy: &Policy) -> Result<Policy> {
        let mut out = Policy::new(policy.player);
        for (o, chain) in self.chains.iter().enumerate() {
            let chain = match chain {
                Some(c) if c.player == policy.player => c,
                _ => continue,
            };
            let m = chain.targets.len();
            let choice = policy.choices.get(&o).ok_or_else(|| {
                Error::invalid(format!("policy missing choice for variable {}", self.names[self.origin[o]]))
            })?;
            choice.check(m)?;
            // Probability that the chain passes node t and the branch taken there.
            let weights = choice.weights();
            let mut remaining = BigRational::one();
            for (t, &node) in chain.nodes.iter().enumerate() {
                let last = t + 1 == chain.nodes.len();
                let here: BigRational = weights
                    .iter()
                    .filter(|(b, _)| *b == t)
                    .fold(BigRational::zero(), |a, (_, w)| a + w);
                let beyond: BigRational = weights
                    .iter()
                    .filter(|(b, _)| if last { *b == t + 1 } else { *b > t })
                    .fold(BigRational::zero(), |a, (_, w)| a + w);
                let c = if remaining.is_zero() || (here.clone() + &beyond).is_zero() {
                    Choice::Pure(0)
                } else {
                    let total = here.clone() + &beyond;
                    Choice::mixed(vec![(0, here / &total), (1, beyond / &total)])
                };
                out.set(node, c);
                remaining = weights
                    .iter()
                    .filter(|(b, _)| *b > t)
                    .fold(BigRational::zero(), |a, (_, w)| a + w);
            }
        }
        for (i, f) in self.forms.iter().enumerate() {
            if f.player() == Some(policy.player) && !out.choices.contains_key(&i) {
                return Err(Error::invalid(format!(
                    "policy lifting needs a normal form produced by to_snf (variable {})",
                    self.names[i]
                )));
            }
        }
        Ok(out)
    }

    /// Translates a policy on binary nodes back to branch choices of the original equations.
    pub fn project_policy(&self, policy: &Policy) -> Policy {
        let mut out = Policy::new(policy.player);
        for (o, chain) in self.chains.iter().enumerate() {
            let chain = match chain {
                Some(c) if c.player == policy.player => c,
                _ => continue,
            };
            let m = chain.targets.len();
            let mut weights = Vec::new();
            let mut reach = BigRational::one();
            for (t, node) in chain.nodes.iter().enumerate() {
                let w = policy
                    .choices
                    .get(node)
                    .map(Choice::weights)
                    .unwrap_or_else(|| vec![(0, BigRational::one())]);
                let left: BigRational = w.iter().filter(|(b, _)| *b == 0).fold(BigRational::zero(), |a, (_, p)| a + p);
                let right: BigRational = w.iter().filter(|(b, _)| *b == 1).fold(BigRational::zero(), |a, (_, p)| a + p);
                weights.push((t, reach.clone() * left));
                reach *= right;
                if t + 1 == chain.nodes.len() {
                    weights.push((m - 1, reach.clone()));
                }
            }
            out.set(o, Choice::mixed(weights));
        }
        out
    }

    /// Maps an SNF vector to the original variables.
    pub fn project<T: Clone>(&self, x: &[T]) -> Vec<T> {
        self.origin.iter().map(|&i| x[i].clone()).collect()
    }

    /// Substitutes the constants 0 or 1 for the marked variables and renumbers the rest.
    ///
    /// Returns the reduced system and, for each kept variable, its index in `self`.
    pub fn substitute(&self, fixed: &[Option<bool>]) -> (SnfSystem, Vec<usize>) {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| fixed[i].is_none()).collect();
        let mut pos = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            pos[old] = new;
        }
        let val = |v: usize| fixed[v].map(|b| if b { BigRational::one() } else { BigRational::zero() });
        let mut forms = Vec::with_capacity(keep.len());
        for &i in &keep {
            let f = match &self.forms[i] {
                SnfForm::L { constant, terms } => {
                    let mut c = constant.clone();
                    let mut t = Vec::new();
                    for (v, k) in terms {
                        match val(*v) {
                            Some(x) => c += k * x,
                            None => t.push((pos[*v], k.clone())),
                        }
                    }
                    SnfForm::linear(c, t)
                }
                SnfForm::Q(j, k) => match (val(*j), val(*k)) {
                    (None, None) => SnfForm::Q(pos[*j], pos[*k]),
                    (Some(a), Some(b)) => SnfForm::constant(a * b),
                    (Some(a), None) => scaled_copy(a, pos[*k]),
                    (None, Some(b)) => scaled_copy(b, pos[*j]),
                },
                SnfForm::M(p, j, k) => match (val(*j), val(*k)) {
                    (None, None) => SnfForm::M(*p, pos[*j], pos[*k]),
                    (Some(a), Some(b)) => SnfForm::constant(match p {
                        Player::Max => std::cmp::max(a, b),
                        Player::Min => std::cmp::min(a, b),
                    }),
                    (Some(a), None) => extreme_with(*p, a, pos[*k]),
                    (None, Some(b)) => extreme_with(*p, b, pos[*j]),
                },
            };
            forms.push(f);
        }
        let names = keep.iter().map(|&i| self.names[i].clone()).collect();
        (SnfSystem::from_forms(names, forms), keep)
    }
}

fn scaled_copy(c: BigRational, v: usize) -> SnfForm {
    if c.is_zero() {
        SnfForm::constant(c)
    } else {
        SnfForm::linear(BigRational::zero(), vec![(v, c)])
    }
}

/// `max(c, x_v)` or `min(c, x_v)` for `c` in {0, 1} on the unit cube.
fn extreme_with(p: Player, c: BigRational, v: usize) -> SnfForm {
    match (p, c.is_one()) {
        (Player::Max, true) | (Player::Min, false) => SnfForm::constant(c),
        _ => SnfForm::copy_of(v),
    }
}
