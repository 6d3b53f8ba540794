//! Scalar abstraction: exact rationals by default, `f64` for large instances.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar, the default number type everywhere.
pub type Rat = BigRational;

/// A number type the whole pipeline can run on.
///
/// Two implementations exist: [`Rat`] (exact arithmetic, zero tolerances) and
/// `f64` (approximate, nonzero tolerances). [`Scalar::total_cmp`] provides a
/// total order so atom lists sort deterministically in both modes.
pub trait Scalar:
    Clone + PartialEq + PartialOrd + fmt::Debug + fmt::Display + Num + Signed + Send + Sync + 'static
{
    /// True when arithmetic is exact and comparisons carry no slack.
    const EXACT: bool;

    fn from_u64(n: u64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &Rat) -> Self;
    /// Exact rational form of this value (binary expansion for floats).
    fn to_rational(&self) -> Rat;
    fn to_f64(&self) -> f64;
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// Slack allowed when validating that probabilities sum to one.
    fn prob_tol() -> Self;
    /// Feasibility tolerance for the simplex solver.
    fn feas_tol() -> Self;
    /// Slack used by inequality records and equality assertions.
    fn check_tol() -> Self;

    fn describe(&self) -> Qty {
        Qty {
            exact: if Self::EXACT { Some(self.to_string()) } else { None },
            approx: self.to_f64(),
        }
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_u64(n: u64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rat::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rat) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Rat {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        Ord::cmp(self, other)
    }

    fn prob_tol() -> Self {
        Rat::zero()
    }

    fn feas_tol() -> Self {
        Rat::zero()
    }

    fn check_tol() -> Self {
        Rat::zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &Rat) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Rat {
        Rat::from_float(*self).unwrap_or_else(Rat::zero)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn prob_tol() -> Self {
        1e-12
    }

    fn feas_tol() -> Self {
        1e-9
    }

    fn check_tol() -> Self {
        1e-7
    }
}

/// A reported quantity: optional exact form plus a decimal approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct Qty {
    pub exact: Option<String>,
    pub approx: f64,
}

/// Shorthand for building exact rationals in code and tests.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"`, decimal (`"1.25"`), or integer literals into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::InvalidSpec(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| bad())?;
        let den: BigInt = d.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = if int == "-" || int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let num: BigInt = frac.parse().map_err(|_| bad())?;
        let den = BigInt::from(10u8).pow(frac.len() as u32);
        let frac_part = Rat::new(num, den);
        let whole = Rat::from_integer(int_part);
        return Ok(if negative { whole - frac_part } else { whole + frac_part });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

/// Formats a scalar the way reports print exact values: `"a/b"` or `"a"`.
pub fn exact_str<T: Scalar>(x: &T) -> String {
    if T::EXACT {
        x.to_string()
    } else {
        x.to_rational().to_string()
    }
}
