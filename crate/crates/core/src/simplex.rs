//! Dense two-phase simplex with Bland's anti-cycling rule, over any [`Scalar`].

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<S> {
    Optimal(Vec<S>),
    Infeasible,
    Unbounded,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
}

const MAX_PIVOTS: usize = 100_000;

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        self.rhs[r] = self.rhs[r].clone() / p;
        let row = self.rows[r].clone();
        let rr = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][e].clone();
            if f.is_zero() {
                continue;
            }
            for (v, w) in self.rows[i].iter_mut().zip(&row) {
                if !w.is_zero() {
                    *v = v.clone() - f.clone() * w.clone();
                }
            }
            self.rhs[i] = self.rhs[i].clone() - f * rr.clone();
        }
        self.basis[r] = e;
    }

    /// Maximizes `cost · x` over the columns marked usable; `false` if unbounded.
    fn optimize(&mut self, cost: &[S], usable: &[bool]) -> Option<bool> {
        let tol = S::tolerance();
        for _ in 0..MAX_PIVOTS {
            let m = self.rows.len();
            let mut entering = None;
            for j in 0..cost.len() {
                if !usable[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for i in 0..m {
                    let a = &self.rows[i][j];
                    if !a.is_zero() {
                        d = d - cost[self.basis[i]].clone() * a.clone();
                    }
                }
                if d > tol {
                    entering = Some(j);
                    break;
                }
            }
            let e = match entering {
                Some(e) => e,
                None => return Some(true),
            };
            let mut leave: Option<(usize, S)> = None;
            for i in 0..m {
                let a = &self.rows[i][e];
                if *a > tol {
                    let ratio = self.rhs[i].clone() / a.clone();
                    let better = match &leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, e),
                None => return Some(false),
            }
        }
        None
    }
}

/// Maximizes `c · x` subject to `a x ≤ b` and `x ≥ 0`.
pub fn maximize<S: Scalar>(c: &[S], a: &[Vec<S>], b: &[S]) -> LpOutcome<S> {
    let n = c.len();
    let m = b.len();
    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < S::zero()).collect();
    let cols = n + m + negative.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let mut r = vec![S::zero(); cols];
        let flip = b[i] < S::zero();
        for j in 0..n {
            r[j] = if flip { -a[i][j].clone() } else { a[i][j].clone() };
        }
        r[n + i] = if flip { -S::one() } else { S::one() };
        if flip {
            let k = negative.iter().position(|&x| x == i).unwrap_or(0);
            r[n + m + k] = S::one();
            basis.push(n + m + k);
            rhs.push(-b[i].clone());
        } else {
            basis.push(n + i);
            rhs.push(b[i].clone());
        }
        rows.push(r);
    }
    let mut t = Tableau { rows, rhs, basis };
    let is_art = |j: usize| j >= n + m;

    if !negative.is_empty() {
        let cost: Vec<S> = (0..cols).map(|j| if is_art(j) { -S::one() } else { S::zero() }).collect();
        let usable = vec![true; cols];
        if t.optimize(&cost, &usable) != Some(true) {
            return LpOutcome::Infeasible;
        }
        let infeas = (0..m)
            .filter(|&i| is_art(t.basis[i]))
            .fold(S::zero(), |s, i| s + t.rhs[i].clone());
        if infeas > S::tolerance() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificial variables out of the basis or drop their rows.
        let mut i = 0;
        while i < t.rows.len() {
            if is_art(t.basis[i]) {
                match (0..n + m).find(|&j| !t.rows[i][j].is_zero() && t.rows[i][j].clone().abs() > S::tolerance()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut cost = vec![S::zero(); cols];
    cost[..n].clone_from_slice(c);
    let usable: Vec<bool> = (0..cols).map(|j| !is_art(j)).collect();
    match t.optimize(&cost, &usable) {
        Some(true) => {
            let mut x = vec![S::zero(); n];
            for (i, &bv) in t.basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t.rhs[i].clone();
                }
            }
            LpOutcome::Optimal(x)
        }
        Some(false) => LpOutcome::Unbounded,
        None => LpOutcome::Infeasible,
    }
}

/// As [`maximize`] but with variables unrestricted in sign.
pub fn maximize_free<S: Scalar>(c: &[S], a: &[Vec<S>], b: &[S]) -> LpOutcome<S> {
    let n = c.len();
    let c2: Vec<S> = c.iter().cloned().chain(c.iter().map(|v| -v.clone())).collect();
    let a2: Vec<Vec<S>> = a
        .iter()
        .map(|r| r.iter().cloned().chain(r.iter().map(|v| -v.clone())).collect())
        .collect();
    match maximize(&c2, &a2, b) {
        LpOutcome::Optimal(x) => LpOutcome::Optimal((0..n).map(|j| x[j].clone() - x[n + j].clone()).collect()),
        other => other,
    }
}
