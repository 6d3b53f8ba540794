//! Rewrites of correlated instances into semi-independent ones that trade
//! items for packages of surrogate items, plus the revenue identities each
//! rewrite guarantees.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::dist::{CorrelationSpec, Dist1D};
use crate::error::{Error, Result};
use crate::mech::optimal_revenue;
use crate::myerson::{brev, myerson_price, srev};
use crate::num::{Rat, Scalar};
use crate::report::{CheckRow, Ineq};
use crate::Caps;

/// A correlated instance rewritten over surrogate items. `packaging[j]` lists
/// the reduced items whose values add up to original item `j`'s value; the
/// packages partition the reduced items, and the reduced spec is always
/// semi-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionMap<T> {
    pub original: CorrelationSpec<T>,
    pub reduced: CorrelationSpec<T>,
    pub packaging: Vec<Vec<usize>>,
}

impl ReductionMap<Rat> {
    pub fn to_scalar<U: Scalar>(&self) -> ReductionMap<U> {
        ReductionMap {
            original: self.original.to_scalar(),
            reduced: self.reduced.to_scalar(),
            packaging: self.packaging.clone(),
        }
    }
}

/// Splits a common-base-value instance over `2n` surrogate items: the item
/// parts keep their own laws as singleton classes, and the shared base
/// becomes one class of `n` always-equal copies. Original item `j` is the
/// package `{j, n + j}`.
pub fn reduce_base_value<T: Scalar>(spec: &CorrelationSpec<T>) -> Result<ReductionMap<T>> {
    let CorrelationSpec::CommonBaseValue { items, base } = spec else {
        return Err(Error::WrongKind { expected: "common_base_value", got: spec.kind_name() });
    };
    spec.validate()?;
    let n = items.len();
    let mut classes: Vec<(Dist1D<T>, usize)> = items.iter().map(|f| (f.clone(), 1)).collect();
    classes.push((base.clone(), n));
    Ok(ReductionMap {
        original: spec.clone(),
        reduced: CorrelationSpec::SemiIndependent { classes },
        packaging: (0..n).map(|j| vec![j, n + j]).collect(),
    })
}

/// Rewrites a linear instance over integer feature counts: the matrix is
/// scaled by the least common multiple of its denominators and the feature
/// laws divided by the same factor, after which feature `a` becomes a class
/// of `n_a = sum of its row` always-equal items and original item `j`
/// packages `M[a][j]` of them per feature. Features no item uses are dropped.
pub fn reduce_linear(spec: &CorrelationSpec<Rat>, caps: &Caps) -> Result<ReductionMap<Rat>> {
    let CorrelationSpec::Linear { features, matrix } = spec else {
        return Err(Error::WrongKind { expected: "linear", got: spec.kind_name() });
    };
    spec.validate()?;
    let n_items = spec.n_items();

    let lcm_den = matrix
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
    let counts: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| (e.clone() * Rat::from_integer(lcm_den.clone())).to_integer())
                .collect()
        })
        .collect();
    let row_sums: Vec<BigInt> = counts
        .iter()
        .map(|row| row.iter().fold(BigInt::zero(), |acc, c| acc + c))
        .collect();

    let total: BigInt = row_sums.iter().sum();
    if total > BigInt::from(caps.max_reduced_items) {
        return Err(Error::SupportExplosion {
            needed: total.to_u128().unwrap_or(u128::MAX),
            cap: caps.max_reduced_items,
        });
    }

    let shrink = Rat::new(BigInt::one(), lcm_den);
    let mut classes = Vec::new();
    let mut cursors = Vec::new();
    let mut next = 0usize;
    let mut kept = Vec::new();
    for (a, feature) in features.iter().enumerate() {
        let n_a = row_sums[a].to_usize().expect("bounded by the item cap");
        if n_a == 0 {
            continue;
        }
        classes.push((feature.scale(&shrink)?, n_a));
        cursors.push(next);
        next += n_a;
        kept.push(a);
    }

    let mut packaging = vec![Vec::new(); n_items];
    for (slot, pkg) in packaging.iter_mut().enumerate() {
        for (c, &a) in kept.iter().enumerate() {
            let copies = counts[a][slot].to_usize().expect("bounded by the item cap");
            pkg.extend(cursors[c]..cursors[c] + copies);
            cursors[c] += copies;
        }
    }

    Ok(ReductionMap {
        original: spec.clone(),
        reduced: CorrelationSpec::SemiIndependent { classes },
        packaging,
    })
}

/// Outcome of re-verifying what a reduction promises.
#[derive(Debug, Clone)]
pub struct ReductionChecks<T> {
    /// The grand-bundle laws coincide as distributions.
    pub sum_dist_equal: bool,
    /// Equal bundle revenue follows from the equal sum laws.
    pub brev_equal: Ineq<T>,
    /// Optimal revenue can only go up when items split into packages.
    /// Absent when the optimal-mechanism computation was not requested.
    pub rev_not_decreased: Option<Ineq<T>>,
    /// Base-value only: separate sale of the original recovers at least half
    /// the reduced separate revenue.
    pub srev_half: Option<Ineq<T>>,
    /// Base-value only: each original item price equals the bundle revenue
    /// of its (item part, base) pair.
    pub pair_identities: Vec<Ineq<T>>,
    /// The reduced joint factorizes over its recorded classes.
    pub reduced_semi_independent: bool,
    /// Package sums reproduce original item values draw by draw.
    pub packaging_conserved: bool,
}

impl<T: Scalar> ReductionChecks<T> {
    pub fn all_hold(&self) -> bool {
        self.sum_dist_equal
            && self.brev_equal.holds
            && self.rev_not_decreased.as_ref().map_or(true, |r| r.holds)
            && self.srev_half.as_ref().map_or(true, |r| r.holds)
            && self.pair_identities.iter().all(|r| r.holds)
            && self.reduced_semi_independent
            && self.packaging_conserved
    }

    pub fn rows(&self) -> Vec<CheckRow> {
        let mut rows = vec![
            CheckRow::fact("sum_dist_equal", self.sum_dist_equal),
            self.brev_equal.describe(),
        ];
        if let Some(r) = &self.rev_not_decreased {
            rows.push(r.describe());
        }
        if let Some(r) = &self.srev_half {
            rows.push(r.describe());
        }
        rows.extend(self.pair_identities.iter().map(Ineq::describe));
        rows.push(CheckRow::fact("reduced_semi_independent", self.reduced_semi_independent));
        rows.push(CheckRow::fact("packaging_conserved", self.packaging_conserved));
        rows
    }
}

fn close<T: Scalar>(a: &T, b: &T) -> bool {
    if T::EXACT {
        return a == b;
    }
    let diff = if a >= b { a.clone() - b.clone() } else { b.clone() - a.clone() };
    diff <= T::check_tol() * (T::one() + a.abs() + b.abs())
}

fn dist_eq<T: Scalar>(a: &Dist1D<T>, b: &Dist1D<T>) -> bool {
    a.support().len() == b.support().len()
        && a.support()
            .iter()
            .zip(b.support())
            .all(|((va, pa), (vb, pb))| close(va, vb) && close(pa, pb))
}

/// Re-derives every identity the reduction is supposed to guarantee.
/// `with_optimal_revenue` controls whether the (expensive) optimal-mechanism
/// comparison runs alongside the closed-form ones.
pub fn check_reduction_identities<T: Scalar>(
    rm: &ReductionMap<T>,
    caps: &Caps,
    with_optimal_revenue: bool,
) -> Result<ReductionChecks<T>> {
    let original = rm.original.build_joint(caps.max_atoms)?;
    let reduced = rm.reduced.build_joint(caps.max_atoms)?;

    let sum_dist_equal = dist_eq(&original.sum_dist(), &reduced.sum_dist());
    let brev_equal = Ineq::eq("bundle_revenue_equal", brev(&original), brev(&reduced));
    let rev_not_decreased = if with_optimal_revenue {
        Some(Ineq::le(
            "revenue_not_decreased",
            optimal_revenue(&original, caps)?.revenue,
            optimal_revenue(&reduced, caps)?.revenue,
        ))
    } else {
        None
    };

    let (srev_half, pair_identities) =
        if let CorrelationSpec::CommonBaseValue { items, base } = &rm.original {
            let mut ids = Vec::with_capacity(items.len());
            for (j, f) in items.iter().enumerate() {
                let pair = CorrelationSpec::Independent { items: vec![f.clone(), base.clone()] }
                    .build_joint(caps.max_atoms)?;
                ids.push(Ineq::eq(
                    format!("pair_bundle_identity[{j}]"),
                    myerson_price(&original.marginal(j)?).revenue,
                    brev(&pair),
                ));
            }
            let half = Ineq::le(
                "separate_revenue_half",
                srev(&reduced) / T::from_u64(2),
                srev(&original),
            );
            (Some(half), ids)
        } else {
            (None, Vec::new())
        };

    Ok(ReductionChecks {
        sum_dist_equal,
        brev_equal,
        rev_not_decreased,
        srev_half,
        pair_identities,
        reduced_semi_independent: reduced.is_semi_independent(),
        packaging_conserved: packaging_conserved(rm)?,
    })
}

/// Checks that every package's value equals its original item's value on
/// every draw, working from the specs rather than the expanded joints.
fn packaging_conserved<T: Scalar>(rm: &ReductionMap<T>) -> Result<bool> {
    let CorrelationSpec::SemiIndependent { classes } = &rm.reduced else {
        return Err(Error::WrongKind { expected: "semi_independent", got: rm.reduced.kind_name() });
    };
    let mut block_start = Vec::with_capacity(classes.len());
    let mut next = 0usize;
    for (_, n_c) in classes {
        block_start.push(next);
        next += n_c;
    }
    let class_of = |idx: usize| block_start.iter().rposition(|&s| s <= idx).expect("idx >= 0");

    match &rm.original {
        // Package j = {item part j, one base copy}: enumerate joint draws of
        // the parts and compare sums directly.
        CorrelationSpec::CommonBaseValue { items, base } => {
            let n = items.len();
            for (j, pkg) in rm.packaging.iter().enumerate() {
                for (f, _) in items[j].support() {
                    for (b, _) in base.support() {
                        let original_value = f.clone() + b.clone();
                        let package_value = pkg
                            .iter()
                            .map(|&idx| if idx < n { f.clone() } else { b.clone() })
                            .fold(T::zero(), |acc, v| acc + v);
                        if !close(&package_value, &original_value) {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
        // Linear values are coefficient sums, so conservation reduces to the
        // coefficient identity (copies of feature a in package j) * scaled
        // value = M[a][j] * original value, checked per support point.
        CorrelationSpec::Linear { features, matrix } => {
            let kept: Vec<usize> = (0..features.len())
                .filter(|&a| matrix[a].iter().any(|e| !e.is_zero()))
                .collect();
            if kept.len() != classes.len() {
                return Ok(false);
            }
            for (j, pkg) in rm.packaging.iter().enumerate() {
                for (c, &a) in kept.iter().enumerate() {
                    let copies =
                        T::from_u64(pkg.iter().filter(|&&idx| class_of(idx) == c).count() as u64);
                    let class_law = &classes[c].0;
                    if class_law.support().len() != features[a].support().len() {
                        return Ok(false);
                    }
                    for ((scaled, sp), (value, p)) in
                        class_law.support().iter().zip(features[a].support())
                    {
                        if sp != p {
                            return Ok(false);
                        }
                        let lhs = copies.clone() * scaled.clone();
                        let rhs = matrix[a][j].clone() * value.clone();
                        if !close(&lhs, &rhs) {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
        other => Err(Error::WrongKind {
            expected: "common_base_value or linear",
            got: other.kind_name(),
        }),
    }
}
