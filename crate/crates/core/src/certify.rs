//! Checks a candidate pair of static policies and, on success, brackets the value.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::gnm::{solve_gfp_snf, solve_lfp_snf, Mode, SolveOptions, ValueVector};
use crate::policy::Policy;
use crate::pps::{MaxMinPps, Player};
use crate::qualitative::{gfp_one_set, is_ldf, lfp_one_set_enum, members, remove_one_vars, Residual};
use crate::scalar::{max_abs_diff, Scalar};
use crate::snf::{to_snf, SnfSystem};

#[derive(Clone, Debug, PartialEq)]
pub enum Rejection {
    /// The min policy leaves a closed set the max player can stay in.
    NotLdf(Vec<usize>),
    /// Under the min policy some least-fixed-point coordinates equal 1.
    LfpOne(Vec<usize>),
    /// The two one-sided values are further apart than `eps / 2`.
    Gap(f64),
}

#[derive(Clone, Debug)]
pub enum Certificate<S> {
    /// Greatest fixed point of the whole normal form, within `eps` of the true value.
    Accept { values: Vec<S>, gap: f64 },
    Reject(Rejection),
}

/// Restricts a policy on `parent` to the max/min rows that survive in `res`.
pub fn restrict_policy(res: &Residual, p: &Policy) -> Policy {
    let mut out = Policy::new(p.player);
    for (r, f) in res.system.forms.iter().enumerate() {
        if f.player() == Some(p.player) {
            if let Some(c) = p.choices.get(&res.keep[r]) {
                out.set(r, c.clone());
            }
        }
    }
    out
}

/// Certifies normal-form policies `sigma` (max) and `tau` (min).
pub fn certify_pair_snf<S: Scalar>(
    snf: &SnfSystem,
    sigma: &Policy,
    tau: &Policy,
    opts: &SolveOptions,
) -> Result<Certificate<S>> {
    if sigma.player != Player::Max || tau.player != Player::Min {
        return Err(Error::invalid("certify expects a max policy and a min policy"));
    }
    snf.check_policy(sigma)?;
    snf.check_policy(tau)?;
    let one = gfp_one_set(snf);
    let res = remove_one_vars(snf, &one.in_set);
    let sigma_r = restrict_policy(&res, sigma);
    let tau_r = restrict_policy(&res, tau);
    let ldf = is_ldf(&res.system, Some(&tau_r))?;
    if let Some(w) = ldf.witness {
        return Ok(Certificate::Reject(Rejection::NotLdf(w.iter().map(|&r| res.keep[r]).collect())));
    }
    let half = SolveOptions {
        eps: opts.eps / 2.0,
        ..opts.clone()
    };
    let upper_sys = res.system.apply_policy(&sigma_r)?;
    let lower_sys = res.system.apply_policy(&tau_r)?;
    let q_one = lfp_one_set_enum(&lower_sys, opts.enum_budget)?;
    if q_one.iter().any(|&b| b) {
        return Ok(Certificate::Reject(Rejection::LfpOne(
            members(&q_one).into_iter().map(|r| res.keep[r]).collect(),
        )));
    }
    let v_sigma = solve_gfp_snf::<S>(&upper_sys, &half)?.values;
    let v_tau = solve_lfp_snf::<S>(&lower_sys, &half)?.values;
    let gap = max_abs_diff(&v_sigma, &v_tau).to_f64();
    if gap > opts.eps / 2.0 {
        return Ok(Certificate::Reject(Rejection::Gap(gap)));
    }
    let fill: Vec<Option<S>> = one.in_set.iter().map(|&b| b.then(S::one)).collect();
    Ok(Certificate::Accept {
        values: res.expand(&v_sigma, &fill),
        gap,
    })
}

#[derive(Clone, Debug)]
pub struct CertifyReport {
    pub accepted: bool,
    pub rejection: Option<Rejection>,
    /// Values of the original variables when accepted.
    pub values: Option<ValueVector>,
    pub gap: Option<f64>,
    pub snf: SnfSystem,
}

/// Certifies policies given on the original max/min equations (branch indices).
pub fn certify_pair(pps: &MaxMinPps, sigma: &Policy, tau: &Policy, opts: &SolveOptions) -> Result<CertifyReport> {
    let snf = to_snf(pps)?;
    let s = snf.lift_policy(sigma)?;
    let t = snf.lift_policy(tau)?;
    match opts.mode {
        Mode::Exact => finish(snf.clone(), certify_pair_snf::<BigRational>(&snf, &s, &t, opts)?, true),
        Mode::Float => finish(snf.clone(), certify_pair_snf::<f64>(&snf, &s, &t, opts)?, false),
    }
}

fn finish<S: Scalar>(snf: SnfSystem, c: Certificate<S>, exact: bool) -> Result<CertifyReport> {
    Ok(match c {
        Certificate::Accept { values, gap } => {
            let v = snf.project(&values);
            let values = if exact {
                ValueVector::Exact(v.iter().map(Scalar::to_ratio).collect())
            } else {
                ValueVector::Float(v.iter().map(Scalar::to_f64).collect())
            };
            CertifyReport {
                accepted: true,
                rejection: None,
                values: Some(values),
                gap: Some(gap),
                snf,
            }
        }
        Certificate::Reject(r) => CertifyReport {
            accepted: false,
            rejection: Some(r),
            values: None,
            gap: None,
            snf,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Choice;
    use crate::pps::{Equation, Monomial, ProbPoly};
    use crate::scalar::rat;

    /// a = 2/3 b^2 + 1/3, b = min(a, c), c = 2/3
    fn two_thirds() -> MaxMinPps {
        MaxMinPps::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                Equation::Single(ProbPoly::from_terms(vec![
                    Monomial::new(rat(2, 3), vec![(1, 2)]),
                    Monomial::constant(rat(1, 3)),
                ])),
                Equation::MinOf(vec![ProbPoly::variable(0), ProbPoly::variable(2)]),
                Equation::Single(ProbPoly::constant(rat(2, 3))),
            ],
        )
    }

    #[test]
    fn good_pair_accepted_bad_pair_rejected() {
        let p = two_thirds();
        let sigma = Policy::new(Player::Max);
        let mut tau = Policy::new(Player::Min);
        tau.set(1, Choice::Pure(0));
        let r = certify_pair(&p, &sigma, &tau, &SolveOptions::with_eps(1e-6)).unwrap();
        assert!(r.accepted);
        let v = r.values.unwrap().to_f64();
        assert!((v[0] - 0.5).abs() < 1e-6 && (v[1] - 0.5).abs() < 1e-6);
        tau.set(1, Choice::Pure(1));
        let r = certify_pair(&p, &sigma, &tau, &SolveOptions::with_eps(1e-6)).unwrap();
        match r.rejection {
            // largest gap is at the squared variable: 4/9 - 1/4
            Some(Rejection::Gap(g)) => assert!((g - 7.0 / 36.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }
}
