//! Plain Kleene iteration of `x ← P(x)`, used as an oracle and as a baseline.

use crate::scalar::{max_abs_diff, Scalar};
use crate::snf::SnfSystem;

#[derive(Clone, Debug)]
pub enum Start<S> {
    Zero,
    One,
    Vector(Vec<S>),
}

#[derive(Clone, Debug)]
pub struct IterationResult<S> {
    pub values: Vec<S>,
    pub iterations: usize,
    /// `‖P(x) - x‖∞` at the returned point.
    pub residual: S,
    pub converged: bool,
}

/// Iterates until successive iterates differ by at most `tol` or the budget runs out.
/// From the zero vector this approaches the least fixed point from below, from the
/// all-ones vector the greatest fixed point from above.
pub fn value_iterate<S: Scalar>(snf: &SnfSystem, start: Start<S>, tol: f64, budget: usize) -> IterationResult<S> {
    let c = snf.compile::<S>();
    let n = snf.len();
    let mut x = match start {
        Start::Zero => vec![S::zero(); n],
        Start::One => vec![S::one(); n],
        Start::Vector(v) => v,
    };
    let tol = S::from_ratio(&crate::scalar::f64_to_ratio(tol));
    let mut iterations = 0;
    loop {
        let next = c.eval(&x);
        let residual = max_abs_diff(&next, &x);
        if residual <= tol {
            return IterationResult {
                values: next,
                iterations,
                residual,
                converged: true,
            };
        }
        if iterations >= budget {
            return IterationResult {
                values: x,
                iterations,
                residual,
                converged: false,
            };
        }
        x = next;
        iterations += 1;
    }
}

/// Probability that the whole population, with `counts[i]` individuals of kind `i`,
/// never reaches the target: `Π g_i^{counts[i]}`.
pub fn population_value<S: Scalar>(g: &[S], counts: &[usize]) -> S {
    let mut acc = S::one();
    for (v, &m) in g.iter().zip(counts) {
        for _ in 0..m {
            acc = acc * v.clone();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::snf::SnfForm;

    #[test]
    fn quadratic_fixed_points() {
        // x = 1/2 u + 1/4, u = x^2: roots of x^2 - 2x + 1/2, LFP 1 - 1/sqrt 2
        let s = SnfSystem::from_forms(
            vec!["x".into(), "u".into()],
            vec![SnfForm::linear(rat(1, 4), vec![(1, rat(1, 2))]), SnfForm::Q(0, 0)],
        );
        let lo = value_iterate::<f64>(&s, Start::Zero, 1e-15, 100_000);
        assert!(lo.converged);
        assert!((lo.values[0] - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn product_of_values() {
        assert_eq!(population_value(&[0.5, 0.25], &[2, 1]), 0.0625);
        assert_eq!(population_value::<f64>(&[0.5], &[0]), 1.0);
    }
}
