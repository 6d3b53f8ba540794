//! Core/tail decomposition: split a joint distribution by per-item value
//! thresholds, and machine-check the revenue inequalities the split satisfies.

use std::collections::BTreeMap;


use crate::dist::{Dist1D, JointDist};
use crate::error::{Error, Result};
use crate::mech::optimal_revenue;
use crate::myerson::{brev, myerson_price, srev};
use crate::num::Scalar;
use crate::report::Ineq;
use crate::Caps;

/// Per-item decomposition thresholds. Item `i` is in the tail of an atom
/// when its value strictly exceeds `cut[i] = item_revenue[i] * t[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds<T> {
    t: Vec<T>,
    cut: Vec<T>,
}

impl<T: Scalar> Thresholds<T> {
    /// Builds thresholds from multipliers `t` and per-item revenues `r`;
    /// cuts are `r_i * t_i`.
    pub fn new(t: Vec<T>, item_revenue: Vec<T>) -> Result<Self> {
        if t.len() != item_revenue.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} multipliers for {} item revenues",
                t.len(),
                item_revenue.len()
            )));
        }
        if t.iter().any(|x| *x <= T::zero()) {
            return Err(Error::InvalidSpec("threshold multipliers must be positive".into()));
        }
        if item_revenue.iter().any(|x| *x < T::zero()) {
            return Err(Error::InvalidSpec("item revenues must be non-negative".into()));
        }
        let cut = t
            .iter()
            .zip(&item_revenue)
            .map(|(t, r)| t.clone() * r.clone())
            .collect();
        Ok(Thresholds { t, cut })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t(&self, i: usize) -> &T {
        &self.t[i]
    }

    pub fn cut(&self, i: usize) -> &T {
        &self.cut[i]
    }

    /// The item revenue the cut was derived from (`cut_i / t_i`).
    pub fn item_revenue(&self, i: usize) -> T {
        self.cut[i].clone() / self.t[i].clone()
    }
}

/// Canonical thresholds for semi-independent instances: with `r_i` the
/// optimal posted-price revenue of item `i`, `r` their sum, and `n_i` the
/// size of item `i`'s similarity class,
/// `t_i = r / (r_i * n_i)`, so `cut_i = r / n_i`.
pub fn semi_independent_thresholds<T: Scalar>(d: &JointDist<T>) -> Result<Thresholds<T>> {
    let n = d.n_items();
    let mut item_revenue = Vec::with_capacity(n);
    for i in 0..n {
        let r_i = myerson_price(&d.marginal(i)?).revenue;
        if r_i.is_zero() {
            return Err(Error::ZeroItemRevenue { item: i });
        }
        item_revenue.push(r_i);
    }
    let r = item_revenue.iter().fold(T::zero(), |acc, x| acc + x.clone());
    let t = (0..n)
        .map(|i| {
            let n_i = T::from_u64(d.multiplicity(i) as u64);
            r.clone() / (item_revenue[i].clone() * n_i)
        })
        .collect();
    Thresholds::new(t, item_revenue)
}

/// One tail event: the set of items exceeding their cuts.
#[derive(Debug, Clone)]
pub struct TailEntry<T> {
    /// Item indices in the tail, sorted.
    pub items: Vec<usize>,
    /// Probability that the tail set is exactly `items`.
    pub prob: T,
    /// Full joint conditioned on the tail set being exactly `items`.
    pub conditional: JointDist<T>,
    /// Law of the tail items conditioned only on all of them being in the
    /// tail; `None` for the empty set.
    pub tail: Option<JointDist<T>>,
    /// Number of similarity classes intersecting `items`.
    pub class_count: usize,
}

/// Everything `decompose` learns about a distribution under given thresholds.
#[derive(Debug, Clone)]
pub struct DecompositionReport<T> {
    pub thresholds: Thresholds<T>,
    /// Per-item tail probabilities `p_i = Pr[v_i > cut_i]`.
    pub tail_prob: Vec<T>,
    /// One entry per occurring tail set, ordered by item set.
    pub entries: Vec<TailEntry<T>>,
    /// Joint conditioned on every item being in the core, when that event
    /// has positive probability.
    pub core: Option<JointDist<T>>,
    /// True iff every atom's tail set is a union of similarity classes.
    pub class_respecting: bool,
    /// Expected number of similarity classes in the tail.
    pub expected_tail_classes: T,
}

pub fn decompose<T: Scalar>(
    d: &JointDist<T>,
    thresholds: &Thresholds<T>,
    caps: &Caps,
) -> Result<DecompositionReport<T>> {
    let n = d.n_items();
    if thresholds.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} thresholds for {n} items",
            thresholds.len()
        )));
    }
    if d.classes().len() > caps.max_classes {
        return Err(Error::TooManyClasses { classes: d.classes().len(), cap: caps.max_classes });
    }

    let tail_set = |values: &[T]| -> Vec<usize> {
        (0..n).filter(|&i| values[i] > *thresholds.cut(i)).collect()
    };

    let mut groups: BTreeMap<Vec<usize>, T> = BTreeMap::new();
    for (values, prob) in d.atoms() {
        let set = tail_set(values);
        groups
            .entry(set)
            .and_modify(|p| *p = p.clone() + prob.clone())
            .or_insert_with(|| prob.clone());
    }

    let class_respecting = groups.keys().all(|set| {
        d.classes()
            .iter()
            .all(|class| class.iter().all(|i| set.contains(i)) || !class.iter().any(|i| set.contains(i)))
    });

    let mut entries = Vec::with_capacity(groups.len());
    let mut core = None;
    for (items, prob) in groups {
        let conditional = d
            .condition(|values| tail_set(values) == items)
            .expect("group has positive probability");
        let tail = if items.is_empty() {
            core = Some(conditional.clone());
            None
        } else {
            let all_tail = d
                .condition(|values| items.iter().all(|&i| values[i] > *thresholds.cut(i)))
                .expect("superset of a positive-probability event");
            Some(all_tail.restrict(&items)?)
        };
        let class_count = d
            .classes()
            .iter()
            .filter(|class| class.iter().any(|i| items.contains(i)))
            .count();
        entries.push(TailEntry { items, prob, conditional, tail, class_count });
    }

    let tail_prob: Vec<T> = (0..n)
        .map(|i| d.event_prob(|values| values[i] > *thresholds.cut(i)))
        .collect();
    let expected_tail_classes = d
        .classes()
        .iter()
        .map(|class| tail_prob[class[0]].clone())
        .fold(T::zero(), |acc, p| acc + p);

    Ok(DecompositionReport {
        thresholds: thresholds.clone(),
        tail_prob,
        entries,
        core,
        class_respecting,
        expected_tail_classes,
    })
}

fn rev<T: Scalar>(d: &JointDist<T>, caps: &Caps) -> Result<T> {
    optimal_revenue(d, caps).map(|r| r.revenue)
}

/// `Pr[v_i > cut_i] <= 1 / t_i` for every item: a buyer above the cut would
/// accept the posted price `cut_i`, so a large tail would contradict the
/// optimality of `r_i`.
pub fn check_tail_prob<T: Scalar>(report: &DecompositionReport<T>) -> Vec<Ineq<T>> {
    report
        .tail_prob
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ineq::le(
                format!("tail_prob_bound[{i}]"),
                p.clone(),
                T::one() / report.thresholds.t(i).clone(),
            )
        })
        .collect()
}

/// The core part of each item is worth no more than the item itself:
/// `Rev(v_i | v_i <= cut_i) <= r_i`. Items whose core event has probability
/// zero are skipped.
pub fn check_core_revenue<T: Scalar>(
    d: &JointDist<T>,
    thresholds: &Thresholds<T>,
) -> Result<Vec<Ineq<T>>> {
    let mut rows = Vec::new();
    for i in 0..d.n_items() {
        let marginal = d.marginal(i)?;
        if let Some(core) = marginal.conditional_le(thresholds.cut(i)) {
            rows.push(Ineq::le(
                format!("core_revenue_bound[{i}]"),
                myerson_price(&core).revenue,
                thresholds.item_revenue(i),
            ));
        }
    }
    Ok(rows)
}

/// Conditioning on a rare tail inflates one-item revenue by at most the
/// inverse tail probability: `Rev(v_i | v_i > cut_i) <= r_i / p_i`.
/// Items that are never in the tail are skipped.
pub fn check_tail_revenue<T: Scalar>(
    d: &JointDist<T>,
    thresholds: &Thresholds<T>,
) -> Result<Vec<Ineq<T>>> {
    let mut rows = Vec::new();
    for i in 0..d.n_items() {
        let marginal = d.marginal(i)?;
        let p_i = marginal.prob_gt(thresholds.cut(i));
        if p_i.is_zero() {
            continue;
        }
        let tail = marginal
            .conditional_gt(thresholds.cut(i))
            .expect("tail probability is positive");
        rows.push(Ineq::le(
            format!("tail_revenue_bound[{i}]"),
            myerson_price(&tail).revenue,
            thresholds.item_revenue(i) / p_i,
        ));
    }
    Ok(rows)
}

/// When `subset` is independent of the rest, selling everything outside it
/// at face value loses nothing:
/// `Rev(D) <= Rev(D restricted to subset) + Val(rest)`.
pub fn check_independent_split<T: Scalar>(
    d: &JointDist<T>,
    subset: &[usize],
    rev_d: &T,
    caps: &Caps,
) -> Result<Ineq<T>> {
    if !d.independent_split(subset)? {
        return Err(Error::IndependenceViolated(format!(
            "items {subset:?} are not independent of the rest"
        )));
    }
    let mut subset: Vec<usize> = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    let complement: Vec<usize> = (0..d.n_items()).filter(|i| !subset.contains(i)).collect();
    let name = format!("independent_split_bound[{subset:?}]");
    let rhs = if complement.is_empty() {
        rev_d.clone()
    } else if subset.is_empty() {
        d.val()
    } else {
        rev(&d.restrict(&subset)?, caps)? + d.restrict(&complement)?.val()
    };
    Ok(Ineq::le(name, rev_d.clone(), rhs))
}

/// Revealing the tail set to the seller can only help:
/// `Rev(D) <= sum_A Pr[tail = A] * Rev(D | tail = A)`.
pub fn check_oracle_split<T: Scalar>(
    report: &DecompositionReport<T>,
    rev_d: &T,
    caps: &Caps,
) -> Result<Ineq<T>> {
    let mut rhs = T::zero();
    for entry in &report.entries {
        rhs = rhs + entry.prob.clone() * rev(&entry.conditional, caps)?;
    }
    Ok(Ineq::le("oracle_split_bound", rev_d.clone(), rhs))
}

/// The decomposition headline: give the core away at face value, sell each
/// tail optimally. Requires class-respecting tail sets, a positive-probability
/// all-core event, and every occurring tail set independent of its complement.
pub fn check_core_decomposition<T: Scalar>(
    d: &JointDist<T>,
    report: &DecompositionReport<T>,
    rev_d: &T,
    caps: &Caps,
) -> Result<Ineq<T>> {
    if !report.class_respecting {
        return Err(Error::PreconditionViolated(
            "tail sets must be unions of similarity classes".into(),
        ));
    }
    let Some(core) = &report.core else {
        return Err(Error::PreconditionViolated(
            "the all-core event has probability zero".into(),
        ));
    };
    for entry in &report.entries {
        if !d.independent_split(&entry.items)? {
            return Err(Error::IndependenceViolated(format!(
                "tail set {:?} is not independent of its complement",
                entry.items
            )));
        }
    }
    let mut rhs = core.val();
    for entry in &report.entries {
        if let Some(tail) = &entry.tail {
            rhs = rhs + entry.prob.clone() * rev(tail, caps)?;
        }
    }
    Ok(Ineq::le("core_decomposition_bound", rev_d.clone(), rhs))
}

/// Restricting a product buyer to a positive-probability subdomain `S`:
/// `s * Rev((D x D') | S) <= s * Val(D | S) + Rev(D')` where `s = Pr[S]`
/// and the predicate sees the concatenated value vector.
pub fn check_subdomain_bound<T: Scalar>(
    d: &JointDist<T>,
    other: &JointDist<T>,
    subdomain: &dyn Fn(&[T]) -> bool,
    caps: &Caps,
) -> Result<Ineq<T>> {
    let product = d.product(other, caps.max_atoms)?;
    let s = product.event_prob(|values| subdomain(values));
    if s.is_zero() {
        return Err(Error::ZeroProbabilitySubdomain);
    }
    let conditioned = product
        .condition(|values| subdomain(values))
        .expect("subdomain has positive probability");
    let lhs = s.clone() * rev(&conditioned, caps)?;
    let d_val_given_s = conditioned
        .atoms()
        .iter()
        .fold(T::zero(), |acc, (values, p)| {
            let front: T = values[..d.n_items()]
                .iter()
                .fold(T::zero(), |a, v| a + v.clone());
            acc + front * p.clone()
        });
    let rhs = s * d_val_given_s + rev(other, caps)?;
    Ok(Ineq::le("subdomain_value_bound", lhs, rhs))
}

/// A law whose posted-price revenue is at most `c` and whose support lies in
/// `[0, t*c]` (with `t >= 1`) has variance at most `(2t - 1) * c^2`.
pub fn check_variance_bound<T: Scalar>(f: &Dist1D<T>, c: &T, t: &T) -> Result<Ineq<T>> {
    if *t < T::one() {
        return Err(Error::PreconditionViolated("variance bound needs t >= 1".into()));
    }
    if myerson_price(f).revenue > *c {
        return Err(Error::PreconditionViolated(format!(
            "posted-price revenue exceeds the cap {c}"
        )));
    }
    if *f.max_value() > t.clone() * c.clone() {
        return Err(Error::PreconditionViolated(format!(
            "support exceeds t*c = {}",
            t.clone() * c.clone()
        )));
    }
    let bound = (T::from_u64(2) * t.clone() - T::one()) * c.clone() * c.clone();
    Ok(Ineq::le("variance_bound", f.variance(), bound))
}

/// Under the canonical thresholds, selling each realized tail optimally is
/// worth at most twice the separate-sale benchmark:
/// `sum_A Pr[tail = A] * Rev(tail law) <= 2 * SRev(D)`.
pub fn check_tail_sum<T: Scalar>(
    d: &JointDist<T>,
    report: &DecompositionReport<T>,
    caps: &Caps,
) -> Result<Ineq<T>> {
    let mut lhs = T::zero();
    for entry in &report.entries {
        if let Some(tail) = &entry.tail {
            lhs = lhs + entry.prob.clone() * rev(tail, caps)?;
        }
    }
    Ok(Ineq::le("tail_sum_bound", lhs, T::from_u64(2) * srev(d)))
}

/// Under the canonical thresholds, the core's welfare is covered by the
/// better simple mechanism: `Val(core) <= 4 * max(SRev, BRev)`.
pub fn check_core_value<T: Scalar>(
    d: &JointDist<T>,
    report: &DecompositionReport<T>,
) -> Result<Ineq<T>> {
    let Some(core) = &report.core else {
        return Err(Error::PreconditionViolated(
            "the all-core event has probability zero".into(),
        ));
    };
    let s = srev(d);
    let b = brev(d);
    let best = if s >= b { s } else { b };
    Ok(Ineq::le("core_value_bound", core.val(), T::from_u64(4) * best))
}
