use std::fmt::Debug;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Arithmetic used by the solvers: exact rationals or `f64`.
pub trait Scalar: Num + Signed + PartialOrd + Clone + Debug + Send + Sync + 'static {
    const EXACT: bool;

    fn from_ratio(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    fn to_ratio(&self) -> BigRational;

    /// Largest multiple of `2^-h` not exceeding `self`.
    fn floor_dyadic(&self, h: u32) -> Self;

    /// Comparison slack: zero for exact arithmetic.
    fn tolerance() -> Self;

    fn from_int(v: i64) -> Self;

    /// Ranking used to pick simplex pivots; larger is preferred.
    fn pivot_score(&self) -> f64;

    /// Solves a dense square system, `None` if singular.
    fn solve_dense(a: Vec<Vec<Self>>, b: Vec<Self>) -> Option<Vec<Self>>;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    /// `self < other` beyond the comparison slack.
    fn definitely_lt(&self, other: &Self) -> bool {
        other.clone() - self.clone() > Self::tolerance()
    }

    fn definitely_gt(&self, other: &Self) -> bool {
        other.definitely_lt(self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn to_ratio(&self) -> BigRational {
        self.clone()
    }

    fn floor_dyadic(&self, h: u32) -> Self {
        let scaled = self.numer() << (h as usize);
        let q = scaled.div_floor(self.denom());
        BigRational::new(q, BigInt::one() << (h as usize))
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn pivot_score(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        -((self.numer().bits() + self.denom().bits()) as f64)
    }

    fn solve_dense(a: Vec<Vec<Self>>, b: Vec<Self>) -> Option<Vec<Self>> {
        crate::linalg::solve_rational(a, b)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_ratio(&self) -> BigRational {
        f64_to_ratio(*self)
    }

    fn floor_dyadic(&self, h: u32) -> Self {
        if h >= 1000 {
            return *self;
        }
        let scale = 2f64.powi(h as i32);
        if !scale.is_finite() {
            return *self;
        }
        (self * scale).floor() / scale
    }

    fn tolerance() -> Self {
        1e-12
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn pivot_score(&self) -> f64 {
        self.abs()
    }

    fn solve_dense(a: Vec<Vec<Self>>, b: Vec<Self>) -> Option<Vec<Self>> {
        crate::linalg::solve_float(a, b)
    }
}

/// Nearest `f64` to a rational, robust to huge numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    // Keep 64 significant bits of the quotient.
    let shift = 64 - (nb - db);
    let q: BigInt = if shift >= 0 {
        (r.numer() << (shift as usize)) / r.denom()
    } else {
        r.numer() / (r.denom() << ((-shift) as usize))
    };
    let mantissa = q.to_f64().unwrap_or(0.0);
    mantissa * 2f64.powi(-shift as i32)
}

/// Exact value of a finite `f64`.
pub fn f64_to_ratio(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(BigRational::zero)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int_bitlen(v: &BigInt) -> u64 {
    if v.sign() == Sign::NoSign {
        0
    } else {
        v.magnitude().bits()
    }
}

pub fn pow2(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << (e as usize))
}

pub fn pow2_neg(e: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << (e as usize))
}

/// Smallest `j` with `2^-j <= eps`.
pub fn bits_for_eps(eps: f64) -> u32 {
    if !(eps > 0.0) {
        return 64;
    }
    if eps >= 1.0 {
        return 0;
    }
    let mut j = (-eps.log2()).ceil().max(0.0) as u32;
    while j > 0 && 2f64.powi(-(j as i32 - 1)) <= eps {
        j -= 1;
    }
    while 2f64.powi(-(j as i32)) > eps {
        j += 1;
    }
    j
}

pub fn from_usize<S: Scalar>(v: usize) -> S {
    S::from_int(i64::from_usize(v).unwrap_or(i64::MAX))
}

pub fn max_abs_diff<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut m = S::zero();
    for (x, y) in a.iter().zip(b) {
        let d = (x.clone() - y.clone()).abs();
        if d > m {
            m = d;
        }
    }
    m
}

/// Decimal rendering with 15 significant digits.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{:.*e}", 14, v);
    let (mant, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..15).contains(&exp) {
        let digits = (14 - exp).max(0) as usize;
        let t = format!("{:.*}", digits, v);
        let t = if t.contains('.') {
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            t
        };
        return t;
    }
    let mant = mant.trim_end_matches('0').trim_end_matches('.');
    format!("{mant}e{exp}")
}

pub fn format_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_dyadic_exact() {
        let third = rat(1, 3);
        assert_eq!(third.floor_dyadic(2), rat(1, 4));
        assert_eq!(rat(-1, 3).floor_dyadic(2), rat(-1, 2));
        assert_eq!(rat(3, 4).floor_dyadic(2), rat(3, 4));
    }

    #[test]
    fn floor_dyadic_float() {
        assert_eq!((1.0f64 / 3.0).floor_dyadic(2), 0.25);
        assert_eq!(0.75f64.floor_dyadic(2), 0.75);
    }

    #[test]
    fn bits_for_eps_matches_definition() {
        assert_eq!(bits_for_eps(0.5), 1);
        assert_eq!(bits_for_eps(0.25), 2);
        assert_eq!(bits_for_eps(0.3), 2);
        assert_eq!(bits_for_eps(1e-9), 30);
    }

    #[test]
    fn huge_ratio_to_f64() {
        let big = BigRational::new(BigInt::one(), BigInt::one() << 1500usize);
        assert_eq!(ratio_to_f64(&big), 0.0);
        let r = BigRational::new(BigInt::from(3) << 2000usize, BigInt::one() << 2001usize);
        assert!((ratio_to_f64(&r) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(format_decimal(0.5), "0.5");
        assert_eq!(format_decimal(2.0 / 3.0), "0.666666666666667");
        assert_eq!(format_decimal(1.0), "1");
        assert_eq!(format_decimal(1e-9), "1e-9");
    }
}
