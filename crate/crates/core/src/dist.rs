//! Finite-support valuation distributions: one-dimensional laws, correlation
//! specifications, and fully expanded joint distributions over item vectors.

use std::cmp::Ordering;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::num::{Rat, Scalar};

/// A one-dimensional law with finite support.
///
/// Support points are distinct, sorted ascending, carry strictly positive
/// probability, and are non-negative. Probabilities sum to one exactly in
/// rational mode and within [`Scalar::prob_tol`] in float mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist1D<T> {
    support: Vec<(T, T)>,
}

impl<T: Scalar> Dist1D<T> {
    /// Builds a law from `(value, probability)` pairs. Pairs are sorted,
    /// duplicate values merged, and the result validated.
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpec("distribution needs at least one support point".into()));
        }
        let mut points = points;
        for (v, p) in &points {
            if *v < T::zero() {
                return Err(Error::InvalidSpec(format!("negative support value {v}")));
            }
            if *p <= T::zero() {
                return Err(Error::InvalidSpec(format!("non-positive probability {p}")));
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<(T, T)> = Vec::with_capacity(points.len());
        for (v, p) in points {
            match support.last_mut() {
                Some((lv, lp)) if *lv == v => *lp = lp.clone() + p,
                _ => support.push((v, p)),
            }
        }
        let total: T = support.iter().fold(T::zero(), |acc, (_, p)| acc + p.clone());
        if (total - T::one()).abs() > T::prob_tol() {
            return Err(Error::InvalidSpec("probabilities must sum to one".into()));
        }
        Ok(Dist1D { support })
    }

    /// Point mass at `v`.
    pub fn point(v: T) -> Result<Self> {
        Self::new(vec![(v, T::one())])
    }

    pub fn support(&self) -> &[(T, T)] {
        &self.support
    }

    pub fn mean(&self) -> T {
        self.support.iter().fold(T::zero(), |acc, (v, p)| acc + v.clone() * p.clone())
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        let m2 = self
            .support
            .iter()
            .fold(T::zero(), |acc, (v, p)| acc + v.clone() * v.clone() * p.clone());
        m2 - m.clone() * m
    }

    pub fn max_value(&self) -> &T {
        &self.support.last().expect("non-empty support").0
    }

    /// True when the law is the point mass at zero.
    pub fn is_identically_zero(&self) -> bool {
        self.support.len() == 1 && self.support[0].0.is_zero()
    }

    pub fn prob_ge(&self, x: &T) -> T {
        self.support
            .iter()
            .filter(|(v, _)| v >= x)
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }

    pub fn prob_gt(&self, x: &T) -> T {
        self.support
            .iter()
            .filter(|(v, _)| v > x)
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }

    pub fn cdf(&self, x: &T) -> T {
        T::one() - self.prob_gt(x)
    }

    /// Conditional law on `v <= cut`, or `None` when that event has
    /// probability zero.
    pub fn conditional_le(&self, cut: &T) -> Option<Self> {
        self.conditional(|v| v <= cut)
    }

    /// Conditional law on `v > cut`, or `None` when that event has
    /// probability zero.
    pub fn conditional_gt(&self, cut: &T) -> Option<Self> {
        self.conditional(|v| v > cut)
    }

    fn conditional(&self, keep: impl Fn(&T) -> bool) -> Option<Self> {
        let kept: Vec<(T, T)> =
            self.support.iter().filter(|(v, _)| keep(v)).cloned().collect();
        if kept.is_empty() {
            return None;
        }
        let total: T = kept.iter().fold(T::zero(), |acc, (_, p)| acc + p.clone());
        let support = kept
            .into_iter()
            .map(|(v, p)| (v, p / total.clone()))
            .collect();
        Some(Dist1D { support })
    }

    /// Law of `alpha * v` for `alpha > 0`.
    pub fn scale(&self, alpha: &T) -> Result<Self> {
        if *alpha <= T::zero() {
            return Err(Error::NonPositiveScale);
        }
        Self::new(
            self.support
                .iter()
                .map(|(v, p)| (v.clone() * alpha.clone(), p.clone()))
                .collect(),
        )
    }
}

impl Dist1D<Rat> {
    pub fn to_scalar<U: Scalar>(&self) -> Dist1D<U> {
        let support = self
            .support
            .iter()
            .map(|(v, p)| (U::from_rational(v), U::from_rational(p)))
            .collect();
        // Conversion preserves order and positivity; float rounding stays
        // inside the probability tolerance for the supported instance sizes.
        Dist1D { support }
    }
}

/// How item values correlate. `build_joint` expands any of these into an
/// explicit [`JointDist`].
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationSpec<T> {
    /// Independent items with the given marginal laws.
    Independent { items: Vec<Dist1D<T>> },
    /// Similarity classes: each class draws one value from its law,
    /// shared verbatim by `multiplicity` items; classes are independent.
    SemiIndependent { classes: Vec<(Dist1D<T>, usize)> },
    /// `v_j = f_j + b` with independent per-item laws and a shared base draw.
    CommonBaseValue { items: Vec<Dist1D<T>>, base: Dist1D<T> },
    /// `v_j = sum_a w_a * matrix[a][j]` over independent feature draws.
    /// `matrix` has one row per feature and one column per item.
    Linear { features: Vec<Dist1D<T>>, matrix: Vec<Vec<T>> },
    /// Raw atom list.
    Explicit { n_items: usize, atoms: Vec<(Vec<T>, T)> },
}

fn product_size(sizes: impl Iterator<Item = usize>) -> u128 {
    sizes.fold(1u128, |acc, s| acc.saturating_mul(s as u128))
}

fn cartesian<T: Clone>(parts: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for part in parts {
        let mut next = Vec::with_capacity(out.len() * part.len());
        for prefix in &out {
            for x in part {
                let mut row = prefix.clone();
                row.push(x.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

impl<T: Scalar> CorrelationSpec<T> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            CorrelationSpec::Independent { .. } => "independent",
            CorrelationSpec::SemiIndependent { .. } => "semi_independent",
            CorrelationSpec::CommonBaseValue { .. } => "common_base_value",
            CorrelationSpec::Linear { .. } => "linear",
            CorrelationSpec::Explicit { .. } => "explicit",
        }
    }

    pub fn n_items(&self) -> usize {
        match self {
            CorrelationSpec::Independent { items } => items.len(),
            CorrelationSpec::SemiIndependent { classes } => {
                classes.iter().map(|(_, m)| m).sum()
            }
            CorrelationSpec::CommonBaseValue { items, .. } => items.len(),
            CorrelationSpec::Linear { matrix, .. } => {
                matrix.first().map_or(0, |row| row.len())
            }
            CorrelationSpec::Explicit { n_items, .. } => *n_items,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CorrelationSpec::Independent { items } => {
                if items.is_empty() {
                    return Err(Error::InvalidSpec("independent spec needs at least one item".into()));
                }
            }
            CorrelationSpec::SemiIndependent { classes } => {
                if classes.is_empty() {
                    return Err(Error::InvalidSpec("semi-independent spec needs at least one class".into()));
                }
                if classes.iter().any(|(_, m)| *m == 0) {
                    return Err(Error::InvalidSpec("class multiplicity must be at least one".into()));
                }
            }
            CorrelationSpec::CommonBaseValue { items, .. } => {
                if items.is_empty() {
                    return Err(Error::InvalidSpec("common-base-value spec needs at least one item".into()));
                }
            }
            CorrelationSpec::Linear { features, matrix } => {
                if features.is_empty() {
                    return Err(Error::InvalidSpec("linear spec needs at least one feature".into()));
                }
                if matrix.len() != features.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "matrix has {} rows for {} features",
                        matrix.len(),
                        features.len()
                    )));
                }
                let n = matrix[0].len();
                if n == 0 {
                    return Err(Error::InvalidSpec("weight matrix needs at least one item column".into()));
                }
                for row in matrix {
                    if row.len() != n {
                        return Err(Error::DimensionMismatch("ragged weight matrix".into()));
                    }
                    if row.iter().any(|w| *w < T::zero()) {
                        return Err(Error::InvalidSpec("negative matrix entry".into()));
                    }
                }
                for j in 0..n {
                    if matrix.iter().all(|row| row[j].is_zero()) {
                        return Err(Error::InvalidSpec(format!(
                            "item {j} has no feature weight; identically-zero items are excluded"
                        )));
                    }
                }
            }
            CorrelationSpec::Explicit { n_items, atoms } => {
                if *n_items == 0 {
                    return Err(Error::InvalidSpec("explicit spec needs at least one item".into()));
                }
                if atoms.is_empty() {
                    return Err(Error::InvalidSpec("explicit spec needs at least one atom".into()));
                }
            }
        }
        Ok(())
    }

    /// Expands the spec into an explicit joint distribution with at most
    /// `max_atoms` atoms before merging.
    pub fn build_joint(&self, max_atoms: usize) -> Result<JointDist<T>> {
        self.validate()?;
        let guard = |needed: u128| {
            if needed > max_atoms as u128 {
                Err(Error::SupportExplosion { needed, cap: max_atoms })
            } else {
                Ok(())
            }
        };
        match self {
            CorrelationSpec::Independent { items } => {
                guard(product_size(items.iter().map(|d| d.support.len())))?;
                let parts: Vec<Vec<(T, T)>> = items.iter().map(|d| d.support.clone()).collect();
                let atoms = cartesian(&parts)
                    .into_iter()
                    .map(|combo| {
                        let prob = combo.iter().fold(T::one(), |acc, (_, p)| acc * p.clone());
                        (combo.into_iter().map(|(v, _)| v).collect(), prob)
                    })
                    .collect();
                let classes = (0..items.len()).map(|i| vec![i]).collect();
                JointDist::from_atoms(items.len(), atoms, Some(classes))
            }
            CorrelationSpec::SemiIndependent { classes } => {
                guard(product_size(classes.iter().map(|(d, _)| d.support.len())))?;
                let n: usize = classes.iter().map(|(_, m)| m).sum();
                let parts: Vec<Vec<(T, T)>> =
                    classes.iter().map(|(d, _)| d.support.clone()).collect();
                let atoms = cartesian(&parts)
                    .into_iter()
                    .map(|combo| {
                        let prob = combo.iter().fold(T::one(), |acc, (_, p)| acc * p.clone());
                        let mut values = Vec::with_capacity(n);
                        for ((v, _), (_, mult)) in combo.iter().zip(classes) {
                            for _ in 0..*mult {
                                values.push(v.clone());
                            }
                        }
                        (values, prob)
                    })
                    .collect();
                let mut partition = Vec::with_capacity(classes.len());
                let mut next = 0;
                for (_, mult) in classes {
                    partition.push((next..next + mult).collect());
                    next += mult;
                }
                JointDist::from_atoms(n, atoms, Some(partition))
            }
            CorrelationSpec::CommonBaseValue { items, base } => {
                guard(product_size(
                    items.iter().map(|d| d.support.len()).chain([base.support.len()]),
                ))?;
                let n = items.len();
                let mut parts: Vec<Vec<(T, T)>> = items.iter().map(|d| d.support.clone()).collect();
                parts.push(base.support.clone());
                let atoms = cartesian(&parts)
                    .into_iter()
                    .map(|combo| {
                        let prob = combo.iter().fold(T::one(), |acc, (_, p)| acc * p.clone());
                        let b = combo[n].0.clone();
                        let values = combo[..n]
                            .iter()
                            .map(|(f, _)| f.clone() + b.clone())
                            .collect();
                        (values, prob)
                    })
                    .collect();
                // Additive correlation does not make items "similar": the
                // similarity partition stays singletons.
                let classes = (0..n).map(|i| vec![i]).collect();
                JointDist::from_atoms(n, atoms, Some(classes))
            }
            CorrelationSpec::Linear { features, matrix } => {
                guard(product_size(features.iter().map(|d| d.support.len())))?;
                let n = matrix[0].len();
                let parts: Vec<Vec<(T, T)>> =
                    features.iter().map(|d| d.support.clone()).collect();
                let atoms = cartesian(&parts)
                    .into_iter()
                    .map(|combo| {
                        let prob = combo.iter().fold(T::one(), |acc, (_, p)| acc * p.clone());
                        let values = (0..n)
                            .map(|j| {
                                combo
                                    .iter()
                                    .zip(matrix)
                                    .fold(T::zero(), |acc, ((w, _), row)| {
                                        acc + w.clone() * row[j].clone()
                                    })
                            })
                            .collect();
                        (values, prob)
                    })
                    .collect();
                let classes = (0..n).map(|i| vec![i]).collect();
                JointDist::from_atoms(n, atoms, Some(classes))
            }
            CorrelationSpec::Explicit { n_items, atoms } => {
                guard(atoms.len() as u128)?;
                // Raw atom lists carry no declared structure; recover the
                // maximal partition of literally always-equal coordinates.
                JointDist::from_atoms(*n_items, atoms.clone(), None)
            }
        }
    }

    /// Deterministic text encoding used for fingerprints.
    pub fn canonical_string(&self) -> String {
        fn law<T: Scalar>(d: &Dist1D<T>) -> String {
            let pts: Vec<String> =
                d.support.iter().map(|(v, p)| format!("{v}:{p}")).collect();
            format!("[{}]", pts.join(","))
        }
        match self {
            CorrelationSpec::Independent { items } => {
                let laws: Vec<String> = items.iter().map(law).collect();
                format!("independent({})", laws.join(";"))
            }
            CorrelationSpec::SemiIndependent { classes } => {
                let laws: Vec<String> = classes
                    .iter()
                    .map(|(d, m)| format!("{}x{m}", law(d)))
                    .collect();
                format!("semi_independent({})", laws.join(";"))
            }
            CorrelationSpec::CommonBaseValue { items, base } => {
                let laws: Vec<String> = items.iter().map(law).collect();
                format!("common_base_value({};base={})", laws.join(";"), law(base))
            }
            CorrelationSpec::Linear { features, matrix } => {
                let laws: Vec<String> = features.iter().map(law).collect();
                let rows: Vec<String> = matrix
                    .iter()
                    .map(|row| {
                        let cells: Vec<String> = row.iter().map(|w| w.to_string()).collect();
                        format!("[{}]", cells.join(","))
                    })
                    .collect();
                format!("linear({};m={})", laws.join(";"), rows.join(","))
            }
            CorrelationSpec::Explicit { n_items, atoms } => {
                let rows: Vec<String> = atoms
                    .iter()
                    .map(|(vs, p)| {
                        let cells: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                        format!("({}):{p}", cells.join(","))
                    })
                    .collect();
                format!("explicit(n={n_items};{})", rows.join(";"))
            }
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical encoding.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl CorrelationSpec<Rat> {
    pub fn to_scalar<U: Scalar>(&self) -> CorrelationSpec<U> {
        match self {
            CorrelationSpec::Independent { items } => CorrelationSpec::Independent {
                items: items.iter().map(Dist1D::to_scalar).collect(),
            },
            CorrelationSpec::SemiIndependent { classes } => CorrelationSpec::SemiIndependent {
                classes: classes.iter().map(|(d, m)| (d.to_scalar(), *m)).collect(),
            },
            CorrelationSpec::CommonBaseValue { items, base } => CorrelationSpec::CommonBaseValue {
                items: items.iter().map(Dist1D::to_scalar).collect(),
                base: base.to_scalar(),
            },
            CorrelationSpec::Linear { features, matrix } => CorrelationSpec::Linear {
                features: features.iter().map(Dist1D::to_scalar).collect(),
                matrix: matrix
                    .iter()
                    .map(|row| row.iter().map(U::from_rational).collect())
                    .collect(),
            },
            CorrelationSpec::Explicit { n_items, atoms } => CorrelationSpec::Explicit {
                n_items: *n_items,
                atoms: atoms
                    .iter()
                    .map(|(vs, p)| {
                        (vs.iter().map(U::from_rational).collect(), U::from_rational(p))
                    })
                    .collect(),
            },
        }
    }
}

/// A joint distribution over `n_items` non-negative values with finite
/// support, plus a similarity partition of the items.
///
/// Atoms are sorted lexicographically, merged, and carry strictly positive
/// probability. Within every similarity class all items have equal value in
/// every atom.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist<T> {
    n_items: usize,
    atoms: Vec<(Vec<T>, T)>,
    classes: Vec<Vec<usize>>,
}

impl<T: Scalar> JointDist<T> {
    /// Builds a joint distribution from raw atoms. When `classes` is `None`
    /// the maximal partition of always-equal coordinates is derived.
    pub fn from_atoms(
        n_items: usize,
        atoms: Vec<(Vec<T>, T)>,
        classes: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if n_items == 0 {
            return Err(Error::InvalidSpec("joint distribution needs at least one item".into()));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidSpec("joint distribution needs at least one atom".into()));
        }
        let mut atoms = atoms;
        for (values, prob) in &atoms {
            if values.len() != n_items {
                return Err(Error::DimensionMismatch(format!(
                    "atom has {} coordinates, expected {n_items}",
                    values.len()
                )));
            }
            if values.iter().any(|v| *v < T::zero()) {
                return Err(Error::InvalidSpec("negative atom value".into()));
            }
            if *prob <= T::zero() {
                return Err(Error::InvalidSpec("non-positive atom probability".into()));
            }
        }
        atoms.sort_by(|a, b| cmp_vec(&a.0, &b.0));
        let mut merged: Vec<(Vec<T>, T)> = Vec::with_capacity(atoms.len());
        for (values, prob) in atoms {
            match merged.last_mut() {
                Some((lv, lp)) if *lv == values => *lp = lp.clone() + prob,
                _ => merged.push((values, prob)),
            }
        }
        let total: T = merged.iter().fold(T::zero(), |acc, (_, p)| acc + p.clone());
        if (total - T::one()).abs() > T::prob_tol() {
            return Err(Error::InvalidSpec("atom probabilities must sum to one".into()));
        }
        let classes = match classes {
            Some(mut classes) => {
                let mut seen = vec![false; n_items];
                for class in &mut classes {
                    class.sort_unstable();
                    for &i in class.iter() {
                        if i >= n_items {
                            return Err(Error::IndexOutOfRange { index: i, n_items });
                        }
                        if seen[i] {
                            return Err(Error::InvalidSpec(format!(
                                "item {i} appears in two similarity classes"
                            )));
                        }
                        seen[i] = true;
                    }
                }
                if !seen.iter().all(|s| *s) {
                    return Err(Error::InvalidSpec("similarity partition must cover all items".into()));
                }
                for class in &classes {
                    for pair in class.windows(2) {
                        for (values, _) in &merged {
                            if values[pair[0]] != values[pair[1]] {
                                return Err(Error::InvalidSpec(format!(
                                    "items {} and {} share a class but differ in some atom",
                                    pair[0], pair[1]
                                )));
                            }
                        }
                    }
                }
                let mut classes = classes;
                classes.sort_by_key(|c| c[0]);
                classes
            }
            None => derive_classes(n_items, &merged),
        };
        Ok(JointDist { n_items, atoms: merged, classes })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn atoms(&self) -> &[(Vec<T>, T)] {
        &self.atoms
    }

    /// Similarity classes, each a sorted list of item indices.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, item: usize) -> usize {
        self.classes
            .iter()
            .position(|c| c.contains(&item))
            .expect("partition covers all items")
    }

    /// Size of the similarity class containing `item`.
    pub fn multiplicity(&self, item: usize) -> usize {
        self.classes[self.class_of(item)].len()
    }

    /// Marginal law of item `j` (zero-based).
    pub fn marginal(&self, j: usize) -> Result<Dist1D<T>> {
        if j >= self.n_items {
            return Err(Error::IndexOutOfRange { index: j, n_items: self.n_items });
        }
        Dist1D::new(
            self.atoms
                .iter()
                .map(|(values, p)| (values[j].clone(), p.clone()))
                .collect(),
        )
    }

    /// Joint marginal on the given items (zero-based, deduplicated, sorted).
    pub fn restrict(&self, items: &[usize]) -> Result<JointDist<T>> {
        let mut items: Vec<usize> = items.to_vec();
        items.sort_unstable();
        items.dedup();
        if items.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(&bad) = items.iter().find(|&&i| i >= self.n_items) {
            return Err(Error::IndexOutOfRange { index: bad, n_items: self.n_items });
        }
        let atoms = self
            .atoms
            .iter()
            .map(|(values, p)| {
                (items.iter().map(|&i| values[i].clone()).collect(), p.clone())
            })
            .collect();
        let classes: Vec<Vec<usize>> = self
            .classes
            .iter()
            .map(|class| {
                class
                    .iter()
                    .filter_map(|i| items.binary_search(i).ok())
                    .collect::<Vec<usize>>()
            })
            .filter(|c| !c.is_empty())
            .collect();
        JointDist::from_atoms(items.len(), atoms, Some(classes))
    }

    /// Law of the grand-bundle value `v_1 + ... + v_n`.
    pub fn sum_dist(&self) -> Dist1D<T> {
        Dist1D::new(
            self.atoms
                .iter()
                .map(|(values, p)| {
                    (values.iter().fold(T::zero(), |acc, v| acc + v.clone()), p.clone())
                })
                .collect(),
        )
        .expect("sums of a valid joint form a valid law")
    }

    /// Expected total value (welfare of giving away everything).
    pub fn val(&self) -> T {
        self.atoms.iter().fold(T::zero(), |acc, (values, p)| {
            acc + values.iter().fold(T::zero(), |a, v| a + v.clone()) * p.clone()
        })
    }

    /// Variance of the grand-bundle value.
    pub fn variance_sum(&self) -> T {
        let mean = self.val();
        let m2 = self.atoms.iter().fold(T::zero(), |acc, (values, p)| {
            let s = values.iter().fold(T::zero(), |a, v| a + v.clone());
            acc + s.clone() * s * p.clone()
        });
        m2 - mean.clone() * mean
    }

    pub fn covariance(&self, i: usize, j: usize) -> Result<T> {
        for idx in [i, j] {
            if idx >= self.n_items {
                return Err(Error::IndexOutOfRange { index: idx, n_items: self.n_items });
            }
        }
        let mut mi = T::zero();
        let mut mj = T::zero();
        let mut mij = T::zero();
        for (values, p) in &self.atoms {
            mi = mi + values[i].clone() * p.clone();
            mj = mj + values[j].clone() * p.clone();
            mij = mij + values[i].clone() * values[j].clone() * p.clone();
        }
        Ok(mij - mi * mj)
    }

    /// True iff items within each recorded class are always equal and the
    /// class-representative values are mutually independent (the joint law
    /// factorizes over classes).
    pub fn is_semi_independent(&self) -> bool {
        for class in &self.classes {
            for pair in class.windows(2) {
                if self
                    .atoms
                    .iter()
                    .any(|(values, _)| values[pair[0]] != values[pair[1]])
                {
                    return false;
                }
            }
        }
        let reps: Vec<usize> = self.classes.iter().map(|c| c[0]).collect();
        let laws: Vec<Dist1D<T>> = reps
            .iter()
            .map(|&r| self.marginal(r).expect("representative in range"))
            .collect();
        let expected = product_size(laws.iter().map(|d| d.support.len()));
        if expected != self.atoms.len() as u128 {
            return false;
        }
        let tol = T::feas_tol();
        for (values, p) in &self.atoms {
            let mut prod = T::one();
            for (law, &r) in laws.iter().zip(&reps) {
                let q = law
                    .support
                    .iter()
                    .find(|(v, _)| *v == values[r])
                    .map(|(_, q)| q.clone())
                    .unwrap_or_else(T::zero);
                prod = prod * q;
            }
            if (prod - p.clone()).abs() > tol {
                return false;
            }
        }
        true
    }

    /// Probability of the event `keep`.
    pub fn event_prob(&self, keep: impl Fn(&[T]) -> bool) -> T {
        self.atoms
            .iter()
            .filter(|(values, _)| keep(values))
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }

    /// Conditional joint on the event `keep`, or `None` when the event has
    /// probability zero.
    pub fn condition(&self, keep: impl Fn(&[T]) -> bool) -> Option<JointDist<T>> {
        let kept: Vec<(Vec<T>, T)> = self
            .atoms
            .iter()
            .filter(|(values, _)| keep(values))
            .cloned()
            .collect();
        if kept.is_empty() {
            return None;
        }
        let total: T = kept.iter().fold(T::zero(), |acc, (_, p)| acc + p.clone());
        let atoms = kept
            .into_iter()
            .map(|(values, p)| (values, p / total.clone()))
            .collect();
        Some(
            JointDist::from_atoms(self.n_items, atoms, Some(self.classes.clone()))
                .expect("conditioning preserves validity"),
        )
    }

    /// Independent join of two joints (this one's items first).
    pub fn product(&self, other: &JointDist<T>, max_atoms: usize) -> Result<JointDist<T>> {
        let needed = (self.atoms.len() as u128).saturating_mul(other.atoms.len() as u128);
        if needed > max_atoms as u128 {
            return Err(Error::SupportExplosion { needed, cap: max_atoms });
        }
        let n = self.n_items + other.n_items;
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for (va, pa) in &self.atoms {
            for (vb, pb) in &other.atoms {
                let mut values = va.clone();
                values.extend(vb.iter().cloned());
                atoms.push((values, pa.clone() * pb.clone()));
            }
        }
        let mut classes = self.classes.clone();
        classes.extend(
            other
                .classes
                .iter()
                .map(|c| c.iter().map(|i| i + self.n_items).collect::<Vec<usize>>()),
        );
        JointDist::from_atoms(n, atoms, Some(classes))
    }

    /// True iff the items in `subset` are jointly independent of the rest.
    /// Trivially true when `subset` is empty or everything.
    pub fn independent_split(&self, subset: &[usize]) -> Result<bool> {
        let mut subset: Vec<usize> = subset.to_vec();
        subset.sort_unstable();
        subset.dedup();
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.n_items) {
            return Err(Error::IndexOutOfRange { index: bad, n_items: self.n_items });
        }
        let complement: Vec<usize> =
            (0..self.n_items).filter(|i| !subset.contains(i)).collect();
        if subset.is_empty() || complement.is_empty() {
            return Ok(true);
        }
        let a = self.restrict(&subset)?;
        let b = self.restrict(&complement)?;
        if (a.atoms.len() as u128) * (b.atoms.len() as u128) != self.atoms.len() as u128 {
            return Ok(false);
        }
        let mut rebuilt = Vec::with_capacity(self.atoms.len());
        for (va, pa) in &a.atoms {
            for (vb, pb) in &b.atoms {
                let mut values = vec![T::zero(); self.n_items];
                for (slot, v) in subset.iter().zip(va) {
                    values[*slot] = v.clone();
                }
                for (slot, v) in complement.iter().zip(vb) {
                    values[*slot] = v.clone();
                }
                rebuilt.push((values, pa.clone() * pb.clone()));
            }
        }
        rebuilt.sort_by(|x, y| cmp_vec(&x.0, &y.0));
        let tol = T::feas_tol();
        Ok(rebuilt.iter().zip(&self.atoms).all(|((va, pa), (vb, pb))| {
            va == vb && (pa.clone() - pb.clone()).abs() <= tol
        }))
    }
}

impl JointDist<Rat> {
    pub fn to_scalar<U: Scalar>(&self) -> JointDist<U> {
        let atoms = self
            .atoms
            .iter()
            .map(|(vs, p)| {
                (
                    vs.iter().map(U::from_rational).collect::<Vec<U>>(),
                    U::from_rational(p),
                )
            })
            .collect();
        JointDist::from_atoms(self.n_items, atoms, Some(self.classes.clone()))
            .expect("conversion preserves validity")
    }
}

fn cmp_vec<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

fn derive_classes<T: Scalar>(n_items: usize, atoms: &[(Vec<T>, T)]) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'items: for i in 0..n_items {
        for class in classes.iter_mut() {
            let rep = class[0];
            if atoms.iter().all(|(values, _)| values[rep] == values[i]) {
                class.push(i);
                continue 'items;
            }
        }
        classes.push(vec![i]);
    }
    classes
}
