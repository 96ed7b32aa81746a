//! Dense linear solves: fraction-free elimination for rationals, partial pivoting for floats.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `a x = b`; fails if `a` is singular.
pub fn solve_linear<S: Scalar>(a: Vec<Vec<S>>, b: Vec<S>) -> Result<Vec<S>> {
    S::solve_dense(a, b).ok_or_else(|| Error::solver("singular linear system"))
}

/// Bareiss elimination on the integer matrix obtained by clearing row denominators.
pub fn solve_rational(a: Vec<Vec<BigRational>>, b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (row, rhs) in a.into_iter().zip(b) {
        let mut l = BigInt::one();
        for v in row.iter().chain(std::iter::once(&rhs)) {
            l = l.lcm(v.denom());
        }
        let mut r: Vec<BigInt> = row.iter().map(|v| v.numer() * (&l / v.denom())).collect();
        r.push(rhs.numer() * (&l / rhs.denom()));
        m.push(r);
    }
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n)
            .filter(|&r| !m[r][k].is_zero())
            .min_by_key(|&r| m[r][k].bits())?;
        m.swap(k, p);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from_integer(m[i][n].clone());
        for j in i + 1..n {
            if !m[i][j].is_zero() {
                acc -= BigRational::from_integer(m[i][j].clone()) * &x[j];
            }
        }
        x[i] = acc / BigRational::from_integer(m[i][i].clone());
    }
    Some(x)
}

pub fn solve_float(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for k in 0..n {
        let p = (k..n).max_by(|&r, &s| a[r][k].abs().total_cmp(&a[s][k].abs()))?;
        if a[p][k].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
        if !x[i].is_finite() {
            return None;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use proptest::prelude::*;

    #[test]
    fn small_rational_system() {
        let a = vec![vec![rat(2, 1), rat(1, 1)], vec![rat(1, 1), rat(3, 1)]];
        let b = vec![rat(3, 1), rat(5, 1)];
        let x = solve_rational(a, b).unwrap();
        assert_eq!(x, vec![rat(4, 5), rat(7, 5)]);
    }

    #[test]
    fn singular_detected() {
        let a = vec![vec![rat(1, 2), rat(1, 4)], vec![rat(1, 1), rat(1, 2)]];
        assert!(solve_rational(a, vec![rat(0, 1), rat(1, 1)]).is_none());
        assert!(solve_float(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0]).is_none());
    }

    proptest! {
        #[test]
        fn rational_solution_satisfies_system(
            entries in proptest::collection::vec(-8i64..8, 16),
            rhs in proptest::collection::vec(-8i64..8, 4),
        ) {
            let a: Vec<Vec<BigRational>> = (0..4)
                .map(|i| (0..4).map(|j| rat(entries[i * 4 + j] + if i == j { 40 } else { 0 }, 1 + (i + j) as i64)).collect())
                .collect();
            let b: Vec<BigRational> = rhs.iter().map(|&v| rat(v, 3)).collect();
            let x = solve_rational(a.clone(), b.clone()).unwrap();
            for i in 0..4 {
                let lhs = (0..4).fold(BigRational::zero(), |s, j| s + &a[i][j] * &x[j]);
                prop_assert_eq!(lhs, b[i].clone());
            }
            let af: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v.to_f64()).collect()).collect();
            let bf: Vec<f64> = b.iter().map(|v| v.to_f64()).collect();
            let xf = solve_float(af, bf).unwrap();
            for i in 0..4 {
                prop_assert!((xf[i] - x[i].to_f64()).abs() < 1e-9);
            }
        }
    }
}
