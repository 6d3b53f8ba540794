//! Inequality records and report rows shared by the check suites.

use crate::num::{Qty, Scalar};

/// One checked inequality: `lhs <= rhs` (or `lhs == rhs`) plus the verdict.
///
/// In float mode the comparison carries a relative slack of
/// [`Scalar::check_tol`]; in rational mode it is exact.
#[derive(Debug, Clone)]
pub struct Ineq<T> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

fn slack<T: Scalar>(lhs: &T, rhs: &T) -> T {
    T::check_tol() * (T::one() + lhs.abs() + rhs.abs())
}

impl<T: Scalar> Ineq<T> {
    /// Records `lhs <= rhs`.
    pub fn le(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let holds = lhs <= rhs.clone() + slack(&lhs, &rhs);
        Ineq { name: name.into(), lhs, rhs, holds }
    }

    /// Records `lhs == rhs`.
    pub fn eq(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let holds = (lhs.clone() - rhs.clone()).abs() <= slack(&lhs, &rhs);
        Ineq { name: name.into(), lhs, rhs, holds }
    }

    pub fn describe(&self) -> CheckRow {
        CheckRow {
            name: self.name.clone(),
            lhs: Some(self.lhs.describe()),
            rhs: Some(self.rhs.describe()),
            holds: self.holds,
        }
    }
}

/// Type-erased report row; `lhs`/`rhs` are absent for plain yes/no facts.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub lhs: Option<Qty>,
    pub rhs: Option<Qty>,
    pub holds: bool,
}

impl CheckRow {
    pub fn fact(name: impl Into<String>, holds: bool) -> Self {
        CheckRow { name: name.into(), lhs: None, rhs: None, holds }
    }
}

/// All rows checked for one instance, plus the arithmetic mode used.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub label: String,
    pub fingerprint: String,
    pub mode: &'static str,
    pub rows: Vec<CheckRow>,
}

impl SuiteReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}
