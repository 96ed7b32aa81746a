//! Newton's method and its generalization to max/min systems, with rounding to a dyadic grid.

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::solve_linear;
use crate::policy::{Choice, Policy};
use crate::pps::{MaxMinPps, Player, SystemClass};
use crate::qualitative::{
    gfp_one_set, lfp_one_set_enum, lfp_one_set_pps, lfp_zero_set, members, remove_one_vars, Residual,
};
use crate::scalar::{bits_for_eps, format_decimal, format_ratio, max_abs_diff, Scalar};
use crate::simplex::{maximize_free, LpOutcome};
use crate::snf::{to_snf, LinRow, SnfForm, SnfSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OperatorStrategy {
    /// Exact or floating-point simplex on the linearized system.
    Lp,
    /// Switch min choices one at a time until the linearized system is consistent.
    PolicyImprovement,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub eps: f64,
    /// Run the full `h = j + 2 + 4|P|` rounded iterations instead of stopping on a small step.
    pub certified: bool,
    pub mode: Mode,
    /// Defaults to the simplex in exact mode and policy improvement in float mode.
    pub strategy: Option<OperatorStrategy>,
    /// Rounding precision cap for practical mode.
    pub h_cap: u32,
    pub max_iterations: usize,
    pub record_trace: bool,
    /// Maximum number of deterministic policies enumerated by qualitative tests.
    pub enum_budget: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            eps: 1e-9,
            certified: false,
            mode: Mode::Exact,
            strategy: None,
            h_cap: 128,
            max_iterations: 10_000,
            record_trace: false,
            enum_budget: 1 << 20,
        }
    }
}

impl SolveOptions {
    pub fn with_eps(eps: f64) -> Self {
        SolveOptions {
            eps,
            ..SolveOptions::default()
        }
    }

    pub fn float(mut self) -> Self {
        self.mode = Mode::Float;
        self
    }

    fn strategy_for<S: Scalar>(&self) -> OperatorStrategy {
        self.strategy.unwrap_or(if S::EXACT {
            OperatorStrategy::Lp
        } else {
            OperatorStrategy::PolicyImprovement
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValueVector {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl ValueVector {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            ValueVector::Exact(v) => v.iter().map(Scalar::to_f64).collect(),
            ValueVector::Float(v) => v.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ValueVector::Exact(v) => v.len(),
            ValueVector::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Decimal with 15 significant digits, plus the exact fraction in exact mode.
    pub fn render(&self, i: usize) -> String {
        match self {
            ValueVector::Exact(v) => format!("{} ({})", format_decimal(v[i].to_f64()), format_ratio(&v[i])),
            ValueVector::Float(v) => format_decimal(v[i]),
        }
    }

    fn from_generic<S: Scalar>(v: Vec<S>) -> ValueVector {
        if S::EXACT {
            ValueVector::Exact(v.iter().map(Scalar::to_ratio).collect())
        } else {
            ValueVector::Float(v.iter().map(Scalar::to_f64).collect())
        }
    }
}

/// One Newton step `y + (I - B(y))^{-1} (P(y) - y)` for a system without max/min rows.
pub fn newton_step<S: Scalar>(snf: &SnfSystem, y: &[S]) -> Result<Vec<S>> {
    if snf.forms.iter().any(|f| f.player().is_some()) {
        return Err(Error::invalid("Newton step needs a system without max/min rows"));
    }
    let n = snf.len();
    let b = snf.jacobian(y);
    let py = snf.evaluate(y);
    let mut a = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { S::one() } else { S::zero() };
            a[i][j] = id - b[i][j].clone();
        }
    }
    let rhs: Vec<S> = py.into_iter().zip(y).map(|(p, v)| p - v.clone()).collect();
    let d = solve_linear(a, rhs)?;
    Ok(y.iter().zip(d).map(|(v, dv)| v.clone() + dv).collect())
}

/// Solves the linearized system at `y` with every max/min row fixed by `policy` choices
/// (`choice[i]` is the selected child for each max/min row).
pub fn solve_linearized<S: Scalar>(rows: &[LinRow<S>], choice: &[Option<usize>]) -> Result<Vec<S>> {
    let n = rows.len();
    let mut a = vec![vec![S::zero(); n]; n];
    let mut b = vec![S::zero(); n];
    for (i, r) in rows.iter().enumerate() {
        a[i][i] = S::one();
        match r {
            LinRow::Affine(c, terms) => {
                b[i] = c.clone();
                for (v, k) in terms {
                    a[i][*v] = a[i][*v].clone() - k.clone();
                }
            }
            LinRow::M(..) => {
                let c = choice[i].ok_or_else(|| Error::solver("missing choice for a max/min row"))?;
                a[i][c] = a[i][c].clone() - S::one();
            }
        }
    }
    solve_linear(a, b)
}

/// The generalized Newton operator `I(y)`.
///
/// For a minPPS it is the greatest `a` with `P^y(a) ≥ a`, for a maxPPS the least `a` with
/// `P^y(a) ≤ a`, where `P^y` linearizes products at `y`. Without max/min rows it is the
/// Newton step. `start` seeds policy improvement and must be a min policy under which the
/// linearized systems are nonsingular (for instance the one-set witness).
pub fn gnm_operator<S: Scalar>(
    snf: &SnfSystem,
    y: &[S],
    strategy: OperatorStrategy,
    start: Option<&Policy>,
) -> Result<Vec<S>> {
    let class = snf.classify();
    let rows = snf.linearize(y);
    match class {
        SystemClass::Pps => solve_linearized(&rows, &vec![None; snf.len()]),
        SystemClass::MinPps if strategy == OperatorStrategy::PolicyImprovement => {
            let witness;
            let start = match start {
                Some(p) => p,
                None => {
                    witness = gfp_one_set(snf).min_witness;
                    &witness
                }
            };
            policy_improvement(snf, &rows, start)
        }
        SystemClass::MinPps | SystemClass::MaxPps => operator_lp(&rows, class == SystemClass::MinPps),
        SystemClass::MaxMinPps => Err(Error::Unsupported(
            "the Newton operator is defined for systems with a single kind of max/min".into(),
        )),
    }
}

fn choice_vector(snf: &SnfSystem, p: &Policy) -> Vec<Option<usize>> {
    (0..snf.len())
        .map(|i| match snf.forms[i] {
            SnfForm::M(_, j, k) => Some(if p.pure(i) == Some(1) { k } else { j }),
            _ => None,
        })
        .collect()
}

fn policy_improvement<S: Scalar>(snf: &SnfSystem, rows: &[LinRow<S>], start: &Policy) -> Result<Vec<S>> {
    let mut pol = start.clone();
    for (i, f) in snf.forms.iter().enumerate() {
        if f.player() == Some(Player::Min) && pol.pure(i).is_none() {
            pol.set(i, Choice::Pure(0));
        }
    }
    let budget = 4 * snf.len() + 16;
    for _ in 0..=budget {
        let z = solve_linearized(rows, &choice_vector(snf, &pol))?;
        let mut switched = false;
        for (i, f) in snf.forms.iter().enumerate() {
            if let SnfForm::M(Player::Min, j, k) = *f {
                let cur = pol.pure(i).unwrap_or(0);
                let (chosen, other) = if cur == 1 { (k, j) } else { (j, k) };
                if z[other].definitely_lt(&z[chosen]) {
                    pol.set(i, Choice::Pure(1 - cur));
                    switched = true;
                    break;
                }
            }
        }
        if !switched {
            return Ok(z);
        }
    }
    Err(Error::solver("policy improvement did not stabilize"))
}

fn operator_lp<S: Scalar>(rows: &[LinRow<S>], min_system: bool) -> Result<Vec<S>> {
    let n = rows.len();
    let mut a: Vec<Vec<S>> = Vec::new();
    let mut b: Vec<S> = Vec::new();
    // min systems: a ≤ P^y(a); max systems: P^y(a) ≤ a. Each row is `sign * (a_i - P^y_i(a)) ≤ 0`.
    let sign = if min_system { S::one() } else { -S::one() };
    for (i, r) in rows.iter().enumerate() {
        match r {
            LinRow::Affine(c, terms) => {
                let mut row = vec![S::zero(); n];
                row[i] = sign.clone();
                for (v, k) in terms {
                    row[*v] = row[*v].clone() - sign.clone() * k.clone();
                }
                a.push(row);
                b.push(sign.clone() * c.clone());
            }
            LinRow::M(_, j, k) => {
                for c in [*j, *k] {
                    let mut row = vec![S::zero(); n];
                    row[i] = row[i].clone() + sign.clone();
                    row[c] = row[c].clone() - sign.clone();
                    a.push(row);
                    b.push(S::zero());
                }
            }
        }
    }
    let obj = vec![sign; n];
    match maximize_free(&obj, &a, &b) {
        LpOutcome::Optimal(x) => Ok(x),
        LpOutcome::Infeasible => Err(Error::solver("Newton operator LP is infeasible")),
        LpOutcome::Unbounded => Err(Error::solver("Newton operator LP is unbounded")),
    }
}

/// Iterates of the rounded method on one residual system.
#[derive(Clone, Debug)]
pub struct GnmRun<S> {
    pub values: Vec<S>,
    pub iterations: usize,
    pub precision_bits: u32,
    pub trace: Vec<Vec<S>>,
}

/// `x⁽ᵏ⁺¹⁾ = max(0, ⌊I(x⁽ᵏ⁾)·2^h⌋ / 2^h)` from `x⁽⁰⁾ = 0`.
pub fn rounded_gnm<S: Scalar>(snf: &SnfSystem, opts: &SolveOptions) -> Result<GnmRun<S>> {
    let n = snf.len();
    let size = snf.encoding_size();
    let j = bits_for_eps(opts.eps);
    let h_cert = (j as u64 + 2 + 4 * size).min(u32::MAX as u64) as u32;
    let h = if opts.certified { h_cert } else { h_cert.min(opts.h_cap) };
    let strategy = opts.strategy_for::<S>();
    let start = (strategy == OperatorStrategy::PolicyImprovement).then(|| gfp_one_set(snf).min_witness);
    let round = |v: Vec<S>| -> Vec<S> { v.into_iter().map(|x| S::max_of(S::zero(), x.floor_dyadic(h))).collect() };
    let mut x = vec![S::zero(); n];
    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(x.clone());
    }
    if n == 0 {
        return Ok(GnmRun { values: x, iterations: 0, precision_bits: h, trace });
    }
    let quarter = S::from_ratio(&crate::scalar::f64_to_ratio(opts.eps / 4.0));
    let limit = if opts.certified { h as usize } else { opts.max_iterations };
    let mut k = 0;
    while k < limit {
        let z = gnm_operator(snf, &x, strategy, start.as_ref())?;
        let step = max_abs_diff(&z, &x);
        let next = round(z);
        k += 1;
        let stationary = next == x;
        x = next;
        if opts.record_trace {
            trace.push(x.clone());
        }
        if opts.certified {
            // Once the rounded iterate repeats, the remaining iterations reproduce it.
            if stationary && S::EXACT {
                break;
            }
        } else if step <= quarter {
            return Ok(GnmRun { values: x, iterations: k, precision_bits: h, trace });
        }
    }
    if !opts.certified {
        return Err(Error::solver(format!("no convergence within {} iterations", opts.max_iterations)));
    }
    Ok(GnmRun { values: x, iterations: k, precision_bits: h, trace })
}

#[derive(Clone, Debug)]
pub struct SnfSolution<S> {
    /// Values of every normal-form variable.
    pub values: Vec<S>,
    pub iterations: usize,
    pub precision_bits: u32,
    pub one_set: Vec<usize>,
    pub zero_set: Vec<usize>,
    pub residual_size: u64,
    pub trace: Vec<Vec<S>>,
}

fn expand_run<S: Scalar>(res: &Residual, run: GnmRun<S>, fill: &[Option<S>], one: Vec<usize>, zero: Vec<usize>) -> SnfSolution<S> {
    let trace = run.trace.iter().map(|t| res.expand(t, fill)).collect();
    SnfSolution {
        values: res.expand(&run.values, fill),
        iterations: run.iterations,
        precision_bits: run.precision_bits,
        one_set: one,
        zero_set: zero,
        residual_size: res.system.encoding_size(),
        trace,
    }
}

fn fill_from(n: usize, one: &[bool], zero: &[bool]) -> Vec<Option<bool>> {
    (0..n)
        .map(|i| {
            if one[i] {
                Some(true)
            } else if zero.get(i).copied().unwrap_or(false) {
                Some(false)
            } else {
                None
            }
        })
        .collect()
}

fn constants<S: Scalar>(fixed: &[Option<bool>]) -> Vec<Option<S>> {
    fixed.iter().map(|f| f.map(|b| if b { S::one() } else { S::zero() })).collect()
}

/// Greatest fixed point of a PPS, maxPPS or minPPS in normal form.
pub fn solve_gfp_snf<S: Scalar>(snf: &SnfSystem, opts: &SolveOptions) -> Result<SnfSolution<S>> {
    let n = snf.len();
    let class = snf.classify();
    if class == SystemClass::MaxMinPps {
        return Err(Error::Unsupported(
            "greatest fixed point of a max-minPPS: use qualitative analysis or certify a policy pair".into(),
        ));
    }
    let one = gfp_one_set(snf).in_set;
    let stage = remove_one_vars(snf, &one);
    let zero = if class == SystemClass::MaxPps {
        // The residual's greatest and least fixed points coincide.
        let z = lfp_zero_set(&stage.system);
        let mut full = vec![false; n];
        for (r, &p) in stage.keep.iter().enumerate() {
            full[p] = z[r];
        }
        full
    } else {
        vec![false; n]
    };
    let fixed = fill_from(n, &one, &zero);
    let res = Residual::new(snf, fixed.clone());
    let run = rounded_gnm::<S>(&res.system, opts)?;
    Ok(expand_run(&res, run, &constants(&fixed), members(&one), members(&zero)))
}

/// Least fixed point of a PPS, maxPPS or minPPS in normal form.
pub fn solve_lfp_snf<S: Scalar>(snf: &SnfSystem, opts: &SolveOptions) -> Result<SnfSolution<S>> {
    let n = snf.len();
    let class = snf.classify();
    let one = match class {
        SystemClass::Pps => lfp_one_set_pps(snf)?,
        SystemClass::MaxPps | SystemClass::MinPps => lfp_one_set_enum(snf, opts.enum_budget)?,
        SystemClass::MaxMinPps => {
            return Err(Error::Unsupported("least fixed point of a max-minPPS is not supported".into()))
        }
    };
    let zero = lfp_zero_set(snf);
    let fixed = fill_from(n, &one, &zero);
    let res = Residual::new(snf, fixed.clone());
    let mut o = opts.clone();
    if class == SystemClass::MinPps {
        o.strategy = Some(OperatorStrategy::Lp);
    }
    let run = rounded_gnm::<S>(&res.system, &o)?;
    Ok(expand_run(&res, run, &constants(&fixed), members(&one), members(&zero)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FixedPoint {
    Greatest,
    Least,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub class: SystemClass,
    pub fixed_point: FixedPoint,
    pub names: Vec<String>,
    /// Values of the original variables.
    pub values: ValueVector,
    pub snf: SnfSystem,
    pub snf_values: ValueVector,
    pub iterations: usize,
    pub precision_bits: u32,
    /// Normal-form variables fixed to 1 and 0 before iterating.
    pub pruned_one_set: Vec<usize>,
    pub pruned_zero_set: Vec<usize>,
    /// `‖P(x) - x‖∞` of the returned normal-form vector.
    pub residual: f64,
    pub certified: bool,
    pub encoding_size: u64,
    pub trace: Vec<Vec<f64>>,
}

fn run_solve<S: Scalar>(pps: &MaxMinPps, fp: FixedPoint, opts: &SolveOptions) -> Result<SolveReport> {
    let snf = to_snf(pps)?;
    let sol = match fp {
        FixedPoint::Greatest => solve_gfp_snf::<S>(&snf, opts)?,
        FixedPoint::Least => solve_lfp_snf::<S>(&snf, opts)?,
    };
    let px = snf.evaluate(&sol.values);
    let residual = max_abs_diff(&px, &sol.values).to_f64();
    Ok(SolveReport {
        class: snf.classify(),
        fixed_point: fp,
        names: pps.names.clone(),
        values: ValueVector::from_generic(snf.project(&sol.values)),
        snf_values: ValueVector::from_generic(sol.values.clone()),
        iterations: sol.iterations,
        precision_bits: sol.precision_bits,
        pruned_one_set: sol.one_set,
        pruned_zero_set: sol.zero_set,
        residual,
        certified: opts.certified,
        encoding_size: sol.residual_size,
        trace: sol.trace.iter().map(|t| t.iter().map(Scalar::to_f64).collect()).collect(),
        snf,
    })
}

/// Greatest fixed point of a PPS, maxPPS or minPPS, to within `opts.eps`.
pub fn solve_gfp(pps: &MaxMinPps, opts: &SolveOptions) -> Result<SolveReport> {
    match opts.mode {
        Mode::Exact => run_solve::<BigRational>(pps, FixedPoint::Greatest, opts),
        Mode::Float => run_solve::<f64>(pps, FixedPoint::Greatest, opts),
    }
}

/// Least fixed point of a PPS, maxPPS or minPPS, to within `opts.eps`.
pub fn solve_lfp(pps: &MaxMinPps, opts: &SolveOptions) -> Result<SolveReport> {
    match opts.mode {
        Mode::Exact => run_solve::<BigRational>(pps, FixedPoint::Least, opts),
        Mode::Float => run_solve::<f64>(pps, FixedPoint::Least, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::Zero;

    fn sys(forms: Vec<SnfForm>) -> SnfSystem {
        let names = (0..forms.len()).map(|i| format!("x{i}")).collect();
        SnfSystem::from_forms(names, forms)
    }

    /// a = 2/3 u + 1/3, u = b*b, b = min(a, c), c = 2/3
    fn two_thirds() -> SnfSystem {
        sys(vec![
            SnfForm::linear(rat(1, 3), vec![(1, rat(2, 3))]),
            SnfForm::Q(2, 2),
            SnfForm::M(Player::Min, 0, 3),
            SnfForm::constant(rat(2, 3)),
        ])
    }

    #[test]
    fn operator_at_zero() {
        let s = two_thirds();
        let y = vec![BigRational::zero(); 4];
        let expect = vec![rat(1, 3), rat(0, 1), rat(1, 3), rat(2, 3)];
        assert_eq!(gnm_operator(&s, &y, OperatorStrategy::Lp, None).unwrap(), expect);
        assert_eq!(gnm_operator(&s, &y, OperatorStrategy::PolicyImprovement, None).unwrap(), expect);
    }

    #[test]
    fn solves_min_example_exactly() {
        let s = two_thirds();
        let sol = solve_gfp_snf::<BigRational>(&s, &SolveOptions::with_eps(1e-9)).unwrap();
        let expect = [0.5, 0.25, 0.5, 2.0 / 3.0];
        for (v, e) in sol.values.iter().zip(expect) {
            assert!((v.to_f64() - e).abs() < 1e-9, "{v} vs {e}");
        }
    }

    #[test]
    fn newton_step_matches_linearized_solve() {
        // x = 1/2 u + 1/4, u = x*x
        let s = sys(vec![SnfForm::linear(rat(1, 4), vec![(1, rat(1, 2))]), SnfForm::Q(0, 0)]);
        let y = vec![rat(1, 5), rat(1, 7)];
        let a = newton_step(&s, &y).unwrap();
        let b = solve_linearized(&s.linearize(&y), &[None, None]).unwrap();
        assert_eq!(a, b);
    }
}
