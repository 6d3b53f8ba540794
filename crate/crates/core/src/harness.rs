//! End-to-end guarantee verification: how far the optimal mechanism can pull
//! ahead of the better simple one, kind by kind, plus seeded instance
//! generators and a worst-ratio search.

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decomp::{
    check_core_decomposition, check_core_revenue, check_core_value, check_independent_split,
    check_oracle_split, check_tail_prob, check_tail_revenue, check_tail_sum, decompose,
    semi_independent_thresholds,
};
use crate::dist::{CorrelationSpec, Dist1D, JointDist};
use crate::error::{Error, Result};
use crate::mech::optimal_revenue;
use crate::myerson::{brev, myerson_price, srev};
use crate::num::{rat, Rat, Scalar};
use crate::reduce::{check_reduction_identities, reduce_base_value, reduce_linear};
use crate::report::{CheckRow, Ineq, SuiteReport};
use crate::Caps;

/// Which multiple of `max(SRev, BRev)` is known to cover `Rev`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuaranteeBound {
    /// A hard constant the ratio must respect.
    Factor(u64),
    /// Logarithmic shape, reported without a constant (none is known in
    /// closed form); `k` is the most features any single item uses.
    LogK { k: usize },
}

/// How the optimal mechanism compares to the simple ones on one instance.
#[derive(Debug, Clone)]
pub struct GuaranteeReport<T> {
    pub srev: T,
    pub brev: T,
    pub rev: T,
    /// `rev / max(srev, brev)`; 1 when everything is worthless.
    pub ratio: T,
    pub bound: Option<GuaranteeBound>,
    /// False only when a `Factor` bound is violated.
    pub holds: bool,
    pub fingerprint: String,
}

fn bound_for<T: Scalar>(
    spec: &CorrelationSpec<T>,
    joint: &JointDist<T>,
) -> Option<GuaranteeBound> {
    match spec {
        CorrelationSpec::Independent { .. } | CorrelationSpec::SemiIndependent { .. } => {
            Some(GuaranteeBound::Factor(6))
        }
        CorrelationSpec::CommonBaseValue { .. } => Some(GuaranteeBound::Factor(12)),
        CorrelationSpec::Linear { features, matrix } => {
            let iid = features.windows(2).all(|w| w[0] == w[1]);
            if !iid {
                return None;
            }
            let k = (0..joint.n_items())
                .map(|j| matrix.iter().filter(|row| !row[j].is_zero()).count())
                .max()
                .unwrap_or(0);
            Some(GuaranteeBound::LogK { k })
        }
        CorrelationSpec::Explicit { .. } => {
            joint.is_semi_independent().then_some(GuaranteeBound::Factor(6))
        }
    }
}

pub fn guarantee_report<T: Scalar>(
    spec: &CorrelationSpec<T>,
    caps: &Caps,
) -> Result<GuaranteeReport<T>> {
    let joint = spec.build_joint(caps.max_atoms)?;
    let s = srev(&joint);
    let b = brev(&joint);
    let rev = optimal_revenue(&joint, caps)?.revenue;
    let best = if s >= b { s.clone() } else { b.clone() };
    let ratio = if best.is_zero() { T::one() } else { rev.clone() / best.clone() };
    let bound = bound_for(spec, &joint);
    let holds = match &bound {
        Some(GuaranteeBound::Factor(c)) => {
            Ineq::le("guarantee", rev.clone(), T::from_u64(*c) * best).holds
        }
        _ => true,
    };
    Ok(GuaranteeReport { srev: s, brev: b, rev, ratio, bound, holds, fingerprint: spec.fingerprint() })
}

/// Replaces a law by the two-point law its optimal posted price sees: value
/// `price` with the sale probability, else 0. Posted-price revenue is
/// unchanged and the new law never exceeds the old one.
pub fn two_point_reduce<T: Scalar>(f: &Dist1D<T>) -> Dist1D<T> {
    let quote = myerson_price(f);
    let miss = T::one() - quote.sale_prob.clone();
    let mut support = Vec::with_capacity(2);
    if miss > T::zero() {
        support.push((T::zero(), miss));
    }
    if quote.sale_prob > T::zero() {
        support.push((quote.price, quote.sale_prob));
    }
    if support.is_empty() {
        support.push((T::zero(), T::one()));
    }
    Dist1D::new(support).expect("a posted-price quote yields a valid law")
}

/// `small`'s CDF stays above `large`'s everywhere (checking the jump points
/// of step functions suffices).
fn dominated_by<T: Scalar>(small: &Dist1D<T>, large: &Dist1D<T>) -> bool {
    small
        .support()
        .iter()
        .chain(large.support())
        .all(|(x, _)| small.cdf(x) + T::check_tol() >= large.cdf(x))
}

/// The two-point rewrite applied to every marginal of an independent
/// instance, with the relations it must preserve.
#[derive(Debug, Clone)]
pub struct TwoPointCheck<T> {
    pub reduced: Vec<Dist1D<T>>,
    pub srev_preserved: Ineq<T>,
    pub brev_not_increased: Ineq<T>,
    /// Every rewritten law is stochastically below its original.
    pub dominated: bool,
}

impl<T: Scalar> TwoPointCheck<T> {
    pub fn all_hold(&self) -> bool {
        self.srev_preserved.holds && self.brev_not_increased.holds && self.dominated
    }

    pub fn rows(&self) -> Vec<CheckRow> {
        vec![
            self.srev_preserved.describe(),
            self.brev_not_increased.describe(),
            CheckRow::fact("two_point_dominated", self.dominated),
        ]
    }
}

pub fn check_two_point<T: Scalar>(
    spec: &CorrelationSpec<T>,
    caps: &Caps,
) -> Result<TwoPointCheck<T>> {
    let CorrelationSpec::Independent { items } = spec else {
        return Err(Error::WrongKind { expected: "independent", got: spec.kind_name() });
    };
    let reduced: Vec<Dist1D<T>> = items.iter().map(two_point_reduce).collect();
    let before = spec.build_joint(caps.max_atoms)?;
    let after = CorrelationSpec::Independent { items: reduced.clone() }
        .build_joint(caps.max_atoms)?;
    let dominated = reduced.iter().zip(items).all(|(g, f)| dominated_by(g, f));
    Ok(TwoPointCheck {
        reduced,
        srev_preserved: Ineq::eq("srev_preserved", srev(&after), srev(&before)),
        brev_not_increased: Ineq::le("brev_not_increased", brev(&after), brev(&before)),
        dominated,
    })
}

/// Prefix revenue of a family of two-point laws sharing one sale probability.
#[derive(Debug, Clone)]
pub struct PigeonholeRecord<T> {
    /// `p * sum(u_i)`: separate revenue of the family.
    pub srev: T,
    /// `max_j j * p * u_(j)` over the descending order, the revenue of
    /// pricing everything at `u_(j)`.
    pub best_prefix: T,
    /// 1-based index attaining the max (smallest when tied).
    pub best_index: usize,
    /// `srev <= best_prefix * H_n` exactly; `H_n <= 1 + ln n` makes this the
    /// sharp form of the logarithmic bound.
    pub harmonic_row: Ineq<T>,
    /// The floating-point statement `best_prefix >= srev / (1 + ln n)`.
    pub log_form_holds: bool,
    /// Bundle revenue from the exact sum law, when the convolution stays
    /// within the atom cap.
    pub brev: Option<T>,
}

pub fn scaled_iid_pigeonhole<T: Scalar>(
    family: &[(T, T)],
    caps: &Caps,
) -> Result<PigeonholeRecord<T>> {
    if family.is_empty() {
        return Err(Error::BadParams("empty two-point family".into()));
    }
    let p = family[0].1.clone();
    if family.iter().any(|(_, q)| *q != p) {
        return Err(Error::NotCommonP);
    }
    if p <= T::zero() || p > T::one() {
        return Err(Error::BadParams(format!("sale probability {p} outside (0, 1]")));
    }
    if family.iter().any(|(u, _)| *u < T::zero()) {
        return Err(Error::BadParams("negative value in two-point family".into()));
    }

    let mut u: Vec<T> = family.iter().map(|(u, _)| u.clone()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let n = u.len();

    let total = u.iter().fold(T::zero(), |acc, x| acc + x.clone());
    let srev = p.clone() * total;

    let mut best_prefix = T::zero();
    let mut best_index = 0;
    for (j, u_j) in u.iter().enumerate() {
        let prefix = T::from_u64(j as u64 + 1) * p.clone() * u_j.clone();
        if prefix > best_prefix {
            best_prefix = prefix;
            best_index = j + 1;
        }
    }

    let harmonic = (1..=n).fold(T::zero(), |acc, i| acc + T::one() / T::from_u64(i as u64));
    let harmonic_row = Ineq::le(
        "pigeonhole_prefix_bound",
        srev.clone(),
        best_prefix.clone() * harmonic,
    );
    let log_form_holds = best_prefix.to_f64() * (1.0 + (n as f64).ln())
        >= srev.to_f64() * (1.0 - 1e-12);

    let mut sum_law = vec![(T::zero(), T::one())];
    let miss = T::one() - p.clone();
    let mut brev_value = None;
    'convolve: {
        for u_i in &u {
            let mut next = Vec::with_capacity(sum_law.len() * 2);
            for (v, q) in &sum_law {
                if miss > T::zero() {
                    next.push((v.clone(), q.clone() * miss.clone()));
                }
                next.push((v.clone() + u_i.clone(), q.clone() * p.clone()));
            }
            if next.len() > caps.max_atoms * 2 {
                break 'convolve;
            }
            sum_law = Dist1D::new(next).expect("convolution of valid laws").support().to_vec();
            if sum_law.len() > caps.max_atoms {
                break 'convolve;
            }
        }
        let law = Dist1D::new(sum_law.clone()).expect("already validated");
        brev_value = Some(myerson_price(&law).revenue);
    }

    Ok(PigeonholeRecord { srev, best_prefix, best_index, harmonic_row, log_form_holds, brev: brev_value })
}

/// Families of instances the generator can draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Independent,
    SemiIndependent,
    CommonBaseValue,
    Linear,
}

impl GenKind {
    pub fn name(self) -> &'static str {
        match self {
            GenKind::Independent => "independent",
            GenKind::SemiIndependent => "semi_independent",
            GenKind::CommonBaseValue => "common_base_value",
            GenKind::Linear => "linear",
        }
    }
}

/// Upper bounds for the generator's draws; each instance picks its actual
/// sizes uniformly at or below these.
#[derive(Debug, Clone)]
pub struct GenParams {
    pub max_items: usize,
    pub max_support: usize,
    pub max_classes: usize,
    pub max_multiplicity: usize,
    pub max_features: usize,
    pub max_matrix_entry: u64,
    /// Draw one feature law and share it, instead of one per feature.
    pub iid_features: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_items: 3,
            max_support: 3,
            max_classes: 3,
            max_multiplicity: 3,
            max_features: 3,
            max_matrix_entry: 2,
            iid_features: false,
        }
    }
}

impl GenParams {
    fn validate(&self) -> Result<()> {
        let sizes = [
            self.max_items,
            self.max_support,
            self.max_classes,
            self.max_multiplicity,
            self.max_features,
        ];
        if sizes.contains(&0) {
            return Err(Error::BadParams("size bounds must be positive".into()));
        }
        if self.max_matrix_entry == 0 {
            return Err(Error::BadParams("matrix entries need a positive bound".into()));
        }
        Ok(())
    }
}

const VALUE_DENOMINATORS: [i64; 3] = [1, 2, 4];

fn draw_value(rng: &mut ChaCha8Rng) -> Rat {
    let numerator = rng.gen_range(0..=16);
    let denominator = VALUE_DENOMINATORS[rng.gen_range(0..VALUE_DENOMINATORS.len())];
    rat(numerator, denominator)
}

fn draw_dist(rng: &mut ChaCha8Rng, max_support: usize, force_positive: bool) -> Dist1D<Rat> {
    loop {
        let size = rng.gen_range(1..=max_support);
        let points: Vec<(Rat, Rat)> = (0..size)
            .map(|_| (draw_value(rng), rat(rng.gen_range(1..=8), 1)))
            .collect();
        let weight: Rat = points.iter().map(|(_, w)| w.clone()).sum();
        let law = Dist1D::new(
            points.into_iter().map(|(v, w)| (v, w / weight.clone())).collect(),
        )
        .expect("positive weights over grid values");
        if !force_positive || !law.is_identically_zero() {
            return law;
        }
    }
}

/// Deterministic random instance for a seed; equal seeds give equal specs.
pub fn gen_instance(kind: GenKind, seed: u64, params: &GenParams) -> Result<CorrelationSpec<Rat>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = match kind {
        GenKind::Independent => CorrelationSpec::Independent {
            items: (0..rng.gen_range(1..=params.max_items))
                .map(|_| draw_dist(&mut rng, params.max_support, true))
                .collect(),
        },
        GenKind::SemiIndependent => CorrelationSpec::SemiIndependent {
            classes: (0..rng.gen_range(1..=params.max_classes))
                .map(|_| {
                    let law = draw_dist(&mut rng, params.max_support, true);
                    (law, rng.gen_range(1..=params.max_multiplicity))
                })
                .collect(),
        },
        GenKind::CommonBaseValue => {
            let items = (0..rng.gen_range(1..=params.max_items))
                .map(|_| draw_dist(&mut rng, params.max_support, false))
                .collect();
            let base = draw_dist(&mut rng, params.max_support, true);
            CorrelationSpec::CommonBaseValue { items, base }
        }
        GenKind::Linear => {
            let l = rng.gen_range(1..=params.max_features);
            let n = rng.gen_range(1..=params.max_items);
            let shared = draw_dist(&mut rng, params.max_support, true);
            let features = (0..l)
                .map(|_| {
                    if params.iid_features {
                        shared.clone()
                    } else {
                        draw_dist(&mut rng, params.max_support, true)
                    }
                })
                .collect();
            let mut matrix: Vec<Vec<Rat>> = (0..l)
                .map(|_| (0..n).map(|_| rat(rng.gen_range(0..=params.max_matrix_entry) as i64, 1)).collect())
                .collect();
            for j in 0..n {
                if matrix.iter().all(|row| row[j].is_zero()) {
                    let a = rng.gen_range(0..l);
                    matrix[a][j] = rat(1, 1);
                }
            }
            CorrelationSpec::Linear { features, matrix }
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Deterministic random single law over the same grid (at least one
/// positive value).
pub fn gen_dist1d(seed: u64, max_support: usize) -> Result<Dist1D<Rat>> {
    if max_support == 0 {
        return Err(Error::BadParams("support bound must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(draw_dist(&mut rng, max_support, true))
}

/// Deterministic two-point family with one shared sale probability.
pub fn gen_two_point_family(seed: u64, max_n: usize) -> Result<Vec<(Rat, Rat)>> {
    if max_n == 0 {
        return Err(Error::BadParams("family size bound must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let p = rat(rng.gen_range(1..=16), 16);
    let mut family: Vec<(Rat, Rat)> =
        (0..n).map(|_| (draw_value(&mut rng), p.clone())).collect();
    if family.iter().all(|(u, _)| u.is_zero()) {
        family[0].0 = rat(1, 1);
    }
    Ok(family)
}

fn mutate(spec: &CorrelationSpec<Rat>, rng: &mut ChaCha8Rng, params: &GenParams) -> CorrelationSpec<Rat> {
    let mut out = spec.clone();
    match &mut out {
        CorrelationSpec::Independent { items } => {
            let j = rng.gen_range(0..items.len());
            items[j] = draw_dist(rng, params.max_support, true);
        }
        CorrelationSpec::SemiIndependent { classes } => {
            let c = rng.gen_range(0..classes.len());
            if rng.gen_bool(0.5) {
                classes[c].0 = draw_dist(rng, params.max_support, true);
            } else {
                classes[c].1 = rng.gen_range(1..=params.max_multiplicity);
            }
        }
        CorrelationSpec::CommonBaseValue { items, base } => {
            if rng.gen_bool(0.5) {
                let j = rng.gen_range(0..items.len());
                items[j] = draw_dist(rng, params.max_support, false);
            } else {
                *base = draw_dist(rng, params.max_support, true);
            }
        }
        CorrelationSpec::Linear { features, matrix } => {
            if rng.gen_bool(0.5) {
                let a = rng.gen_range(0..features.len());
                features[a] = draw_dist(rng, params.max_support, true);
                if params.iid_features {
                    let shared = features[a].clone();
                    for f in features.iter_mut() {
                        *f = shared.clone();
                    }
                }
            } else {
                let a = rng.gen_range(0..matrix.len());
                let j = rng.gen_range(0..matrix[0].len());
                matrix[a][j] = rat(rng.gen_range(0..=params.max_matrix_entry) as i64, 1);
                if matrix.iter().all(|row| row[j].is_zero()) {
                    matrix[a][j] = rat(1, 1);
                }
            }
        }
        CorrelationSpec::Explicit { .. } => {}
    }
    out
}

/// Hill-climbs over seeded instances toward the largest observed
/// `rev / max(srev, brev)`, one accepted perturbation at a time. Reports the
/// worst case found; makes no optimality claim.
pub fn ratio_search<T: Scalar>(
    kind: GenKind,
    seeds: std::ops::RangeInclusive<u64>,
    steps: usize,
    params: &GenParams,
    caps: &Caps,
) -> Result<(CorrelationSpec<Rat>, GuaranteeReport<T>)> {
    let mut best: Option<(CorrelationSpec<Rat>, GuaranteeReport<T>)> = None;
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9));
        let mut spec = gen_instance(kind, seed, params)?;
        let mut report = guarantee_report::<T>(&spec.to_scalar(), caps)?;
        for _ in 0..steps {
            let candidate = mutate(&spec, &mut rng, params);
            if candidate.validate().is_err() {
                continue;
            }
            let Ok(cand_report) = guarantee_report::<T>(&candidate.to_scalar(), caps) else {
                continue;
            };
            if cand_report.ratio > report.ratio {
                spec = candidate;
                report = cand_report;
            }
        }
        let better = match &best {
            None => true,
            Some((_, b)) => report.ratio > b.ratio,
        };
        if better {
            best = Some((spec, report));
        }
    }
    best.ok_or_else(|| Error::BadParams("empty seed range".into()))
}

/// Which checks to run on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Revenue computations and the sandwich inequalities only.
    Core,
    /// Core plus the full threshold-decomposition battery.
    Semi,
    /// Core plus the base-value reduction identities.
    Cbv,
    /// Core plus the feature-matrix reduction identities.
    Linear,
    /// Core plus whatever the instance kind supports.
    All,
}

/// The three relations every instance satisfies: the simple mechanisms are
/// dominated by the optimum, which is dominated by full welfare.
pub fn sandwich_rows<T: Scalar>(joint: &JointDist<T>, rev: &T) -> Vec<Ineq<T>> {
    vec![
        Ineq::le("srev_le_rev", srev(joint), rev.clone()),
        Ineq::le("brev_le_rev", brev(joint), rev.clone()),
        Ineq::le("rev_le_val", rev.clone(), joint.val()),
    ]
}

/// Pre-merge joint size, the quantity deciding whether exact arithmetic is
/// affordable (reductions re-expand the same product, so this is also their
/// size).
fn pre_merge_size<T: Scalar>(spec: &CorrelationSpec<T>) -> u128 {
    let product = |sizes: &mut dyn Iterator<Item = usize>| {
        sizes.fold(1u128, |acc, s| acc.saturating_mul(s as u128))
    };
    match spec {
        CorrelationSpec::Independent { items } => {
            product(&mut items.iter().map(|f| f.support().len()))
        }
        CorrelationSpec::SemiIndependent { classes } => {
            product(&mut classes.iter().map(|(f, _)| f.support().len()))
        }
        CorrelationSpec::CommonBaseValue { items, base } => {
            product(&mut items.iter().chain([base]).map(|f| f.support().len()))
        }
        CorrelationSpec::Linear { features, .. } => {
            product(&mut features.iter().map(|f| f.support().len()))
        }
        CorrelationSpec::Explicit { atoms, .. } => atoms.len() as u128,
    }
}

/// Runs a suite on one instance, choosing exact arithmetic when the joint is
/// small enough and floating point otherwise.
pub fn run_suite(
    spec: &CorrelationSpec<Rat>,
    suite: Suite,
    caps: &Caps,
    label: &str,
) -> Result<SuiteReport> {
    if pre_merge_size(spec) <= caps.rational_max_atoms as u128 {
        suite_rows::<Rat>(spec, spec.clone(), suite, caps, label, "rational")
    } else {
        let converted = spec.to_scalar::<f64>();
        suite_rows::<f64>(spec, converted, suite, caps, label, "float")
    }
}

fn suite_rows<T: Scalar>(
    spec_rat: &CorrelationSpec<Rat>,
    spec: CorrelationSpec<T>,
    suite: Suite,
    caps: &Caps,
    label: &str,
    mode: &'static str,
) -> Result<SuiteReport> {
    let joint = spec.build_joint(caps.max_atoms)?;
    let rev = optimal_revenue(&joint, caps)?.revenue;
    let mut rows: Vec<CheckRow> =
        sandwich_rows(&joint, &rev).iter().map(Ineq::describe).collect();

    let s = srev(&joint);
    let b = brev(&joint);
    let best = if s >= b { s.clone() } else { b.clone() };
    match bound_for(&spec, &joint) {
        Some(GuaranteeBound::Factor(c)) => {
            rows.push(
                Ineq::le(
                    format!("guarantee_factor_{c}"),
                    rev.clone(),
                    T::from_u64(c) * best,
                )
                .describe(),
            );
        }
        Some(GuaranteeBound::LogK { k }) => {
            let ratio = if best.is_zero() { T::one() } else { rev.clone() / best };
            let mut row = CheckRow::fact(format!("ratio_reported_log_k[{k}]"), true);
            row.lhs = Some(ratio.describe());
            rows.push(row);
        }
        None => {}
    }
    if joint.classes().len() == 1 {
        rows.push(Ineq::eq("one_class_rev_equals_srev", rev.clone(), s.clone()).describe());
    }

    let semi_applicable = joint.is_semi_independent();
    let run_semi = match suite {
        Suite::Semi => {
            if !semi_applicable {
                return Err(Error::PreconditionViolated(
                    "instance is not semi-independent".into(),
                ));
            }
            true
        }
        Suite::All => semi_applicable,
        _ => false,
    };
    if run_semi {
        let thresholds = semi_independent_thresholds(&joint)?;
        let report = decompose(&joint, &thresholds, caps)?;
        rows.extend(check_tail_prob(&report).iter().map(Ineq::describe));
        rows.extend(check_core_revenue(&joint, &thresholds)?.iter().map(Ineq::describe));
        rows.extend(check_tail_revenue(&joint, &thresholds)?.iter().map(Ineq::describe));
        rows.push(check_oracle_split(&report, &rev, caps)?.describe());
        rows.push(check_core_decomposition(&joint, &report, &rev, caps)?.describe());
        rows.push(check_tail_sum(&joint, &report, caps)?.describe());
        rows.push(check_core_value(&joint, &report)?.describe());
        rows.push(
            Ineq::le(
                "expected_tail_classes_bound",
                report.expected_tail_classes.clone(),
                T::one(),
            )
            .describe(),
        );
        for class in joint.classes() {
            rows.push(check_independent_split(&joint, class, &rev, caps)?.describe());
        }
    }

    let run_cbv = matches!(suite, Suite::Cbv)
        || (matches!(suite, Suite::All)
            && matches!(spec, CorrelationSpec::CommonBaseValue { .. }));
    if run_cbv {
        let rm = reduce_base_value(&spec)?;
        rows.extend(check_reduction_identities(&rm, caps, true)?.rows());
    }

    let run_linear = matches!(suite, Suite::Linear)
        || (matches!(suite, Suite::All) && matches!(spec, CorrelationSpec::Linear { .. }));
    if run_linear {
        let rm = reduce_linear(spec_rat, caps)?.to_scalar::<T>();
        rows.extend(check_reduction_identities(&rm, caps, true)?.rows());
    }

    if matches!(suite, Suite::All) {
        if let CorrelationSpec::Independent { .. } = &spec {
            rows.extend(check_two_point(&spec, caps)?.rows());
        }
    }

    Ok(SuiteReport {
        label: label.to_string(),
        fingerprint: spec_rat.fingerprint(),
        mode,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform12() -> Dist1D<Rat> {
        Dist1D::new(vec![(rat(1, 1), rat(1, 2)), (rat(2, 1), rat(1, 2))]).unwrap()
    }

    #[test]
    fn uniform_pair_report() {
        let spec = CorrelationSpec::Independent { items: vec![uniform12(), uniform12()] };
        let report = guarantee_report::<Rat>(&spec, &Caps::default()).unwrap();
        assert_eq!(report.srev, rat(2, 1));
        assert_eq!(report.brev, rat(9, 4));
        assert_eq!(report.rev, rat(9, 4));
        assert_eq!(report.ratio, rat(1, 1));
        assert_eq!(report.bound, Some(GuaranteeBound::Factor(6)));
        assert!(report.holds);
    }

    #[test]
    fn tied_pair_ratio_is_one() {
        let spec = CorrelationSpec::SemiIndependent { classes: vec![(uniform12(), 2)] };
        let report = guarantee_report::<Rat>(&spec, &Caps::default()).unwrap();
        assert_eq!(report.ratio, rat(1, 1));
        assert_eq!(report.rev, report.srev);
        assert!(report.holds);
    }

    #[test]
    fn linear_bound_reports_k_only_when_iid() {
        let f = uniform12();
        let iid = CorrelationSpec::Linear {
            features: vec![f.clone(), f.clone()],
            matrix: vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]],
        };
        let report = guarantee_report::<Rat>(&iid, &Caps::default()).unwrap();
        assert_eq!(report.bound, Some(GuaranteeBound::LogK { k: 2 }));
        assert!(report.holds);

        let skew = CorrelationSpec::Linear {
            features: vec![f.clone(), Dist1D::point(rat(3, 1)).unwrap()],
            matrix: vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]],
        };
        let report = guarantee_report::<Rat>(&skew, &Caps::default()).unwrap();
        assert_eq!(report.bound, None);
    }

    #[test]
    fn explicit_bound_requires_factorization() {
        let semi = CorrelationSpec::Explicit {
            n_items: 2,
            atoms: vec![
                (vec![rat(1, 1), rat(1, 1)], rat(1, 2)),
                (vec![rat(2, 1), rat(2, 1)], rat(1, 2)),
            ],
        };
        let report = guarantee_report::<Rat>(&semi, &Caps::default()).unwrap();
        assert_eq!(report.bound, Some(GuaranteeBound::Factor(6)));

        let tangled = CorrelationSpec::Explicit {
            n_items: 2,
            atoms: vec![
                (vec![rat(1, 1), rat(2, 1)], rat(1, 2)),
                (vec![rat(2, 1), rat(1, 1)], rat(1, 2)),
            ],
        };
        let report = guarantee_report::<Rat>(&tangled, &Caps::default()).unwrap();
        assert_eq!(report.bound, None);
        assert!(report.holds);
    }

    #[test]
    fn two_point_rewrites() {
        // Tie at price 1 sells with probability 1.
        assert_eq!(
            two_point_reduce(&uniform12()),
            Dist1D::point(rat(1, 1)).unwrap()
        );
        let spiky =
            Dist1D::new(vec![(rat(0, 1), rat(3, 4)), (rat(4, 1), rat(1, 4))]).unwrap();
        assert_eq!(two_point_reduce(&spiky), spiky);
        let point = Dist1D::point(rat(7, 2)).unwrap();
        assert_eq!(two_point_reduce(&point), point);
        let zero = Dist1D::point(rat(0, 1)).unwrap();
        assert_eq!(two_point_reduce(&zero), zero);
    }

    #[test]
    fn two_point_check_on_uniform_pair() {
        let spec = CorrelationSpec::Independent { items: vec![uniform12(), uniform12()] };
        let check = check_two_point(&spec, &Caps::default()).unwrap();
        assert!(check.all_hold());
        assert_eq!(check.srev_preserved.lhs, rat(2, 1));
        // Both rewritten laws are the point mass at 1: bundle sells at 2.
        assert_eq!(check.brev_not_increased.lhs, rat(2, 1));
        assert_eq!(check.brev_not_increased.rhs, rat(9, 4));

        let semi = CorrelationSpec::SemiIndependent { classes: vec![(uniform12(), 2)] };
        assert!(matches!(
            check_two_point(&semi, &Caps::default()),
            Err(Error::WrongKind { expected: "independent", .. })
        ));
    }

    #[test]
    fn pigeonhole_equal_values() {
        let family: Vec<_> = (0..4).map(|_| (rat(2, 1), rat(1, 4))).collect();
        let record = scaled_iid_pigeonhole(&family, &Caps::default()).unwrap();
        assert_eq!(record.srev, rat(2, 1));
        assert_eq!(record.best_prefix, rat(2, 1));
        assert_eq!(record.best_index, 4);
        assert!(record.harmonic_row.holds);
        assert!(record.log_form_holds);
        assert!(record.brev.is_some());
    }

    #[test]
    fn pigeonhole_harmonic_family_is_tight() {
        // u_i = 1/i: every prefix gives the same revenue, and srev equals
        // best * H_n exactly.
        let family = vec![
            (rat(1, 1), rat(1, 8)),
            (rat(1, 2), rat(1, 8)),
            (rat(1, 3), rat(1, 8)),
        ];
        let record = scaled_iid_pigeonhole(&family, &Caps::default()).unwrap();
        assert_eq!(record.best_prefix, rat(1, 8));
        assert_eq!(record.best_index, 1);
        assert_eq!(record.harmonic_row.lhs, record.harmonic_row.rhs);
        assert!(record.harmonic_row.holds);
        assert_eq!(record.srev, rat(11, 48));
    }

    #[test]
    fn pigeonhole_rejects_mixed_probabilities() {
        let family = vec![(rat(1, 1), rat(1, 2)), (rat(1, 1), rat(1, 4))];
        assert!(matches!(
            scaled_iid_pigeonhole(&family, &Caps::default()),
            Err(Error::NotCommonP)
        ));
        assert!(matches!(
            scaled_iid_pigeonhole::<Rat>(&[], &Caps::default()),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let params = GenParams::default();
        for kind in [
            GenKind::Independent,
            GenKind::SemiIndependent,
            GenKind::CommonBaseValue,
            GenKind::Linear,
        ] {
            for seed in 0..20 {
                let a = gen_instance(kind, seed, &params).unwrap();
                let b = gen_instance(kind, seed, &params).unwrap();
                assert_eq!(a, b, "{} seed {seed}", kind.name());
                let joint = a.build_joint(200).unwrap();
                for j in 0..joint.n_items() {
                    let marginal = joint.marginal(j).unwrap();
                    assert!(
                        !marginal.is_identically_zero(),
                        "{} seed {seed} item {j} is worthless",
                        kind.name()
                    );
                }
            }
        }
    }

    #[test]
    fn generator_rejects_zero_bounds() {
        let params = GenParams { max_support: 0, ..GenParams::default() };
        assert!(matches!(
            gen_instance(GenKind::Independent, 1, &params),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(gen_dist1d(1, 0), Err(Error::BadParams(_))));
        assert!(matches!(gen_two_point_family(1, 0), Err(Error::BadParams(_))));
    }

    #[test]
    fn two_point_family_shares_p() {
        for seed in 0..20 {
            let family = gen_two_point_family(seed, 16).unwrap();
            assert!(!family.is_empty());
            assert!(family.iter().all(|(_, p)| *p == family[0].1));
            assert!(family.iter().any(|(u, _)| *u > rat(0, 1)));
        }
    }

    #[test]
    fn single_item_search_stays_at_ratio_one() {
        let params = GenParams { max_items: 1, ..GenParams::default() };
        let (spec, report) =
            ratio_search::<Rat>(GenKind::Independent, 1..=3, 2, &params, &Caps::default())
                .unwrap();
        assert_eq!(spec.n_items(), 1);
        assert_eq!(report.ratio, rat(1, 1));
    }

    #[test]
    fn suite_on_uniform_pair_holds_exactly() {
        let spec = CorrelationSpec::Independent { items: vec![uniform12(), uniform12()] };
        let report = run_suite(&spec, Suite::All, &Caps::default(), "uniform12-pair").unwrap();
        assert_eq!(report.mode, "rational");
        assert!(report.all_hold(), "{:#?}", report.rows);
        assert!(report.rows.iter().any(|r| r.name == "srev_preserved"));
        assert!(report.rows.iter().any(|r| r.name == "core_decomposition_bound"));
    }

    #[test]
    fn suite_switches_to_float_on_large_joints() {
        // Three four-point marginals: 64 joint atoms, past the exact cutoff.
        let law = |shift: u64| {
            Dist1D::new(
                (0..4u64)
                    .map(|v| (rat((shift + v) as i64, 1), rat(1, 4)))
                    .collect(),
            )
            .unwrap()
        };
        let spec = CorrelationSpec::Independent { items: vec![law(1), law(2), law(3)] };
        assert!(pre_merge_size(&spec) > Caps::default().rational_max_atoms as u128);
        let report = run_suite(&spec, Suite::Core, &Caps::default(), "big").unwrap();
        assert_eq!(report.mode, "float");
        assert!(report.all_hold(), "{:#?}", report.rows);
    }

    #[test]
    fn semi_suite_rejects_entangled_instances() {
        let spec = CorrelationSpec::Explicit {
            n_items: 2,
            atoms: vec![
                (vec![rat(1, 1), rat(2, 1)], rat(1, 2)),
                (vec![rat(2, 1), rat(1, 1)], rat(1, 2)),
            ],
        };
        assert!(matches!(
            run_suite(&spec, Suite::Semi, &Caps::default(), "tangled"),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn kind_suites_on_generated_instances() {
        let caps = Caps::default();
        let params = GenParams::default();
        for seed in 0..5 {
            let semi = gen_instance(GenKind::SemiIndependent, seed, &params).unwrap();
            let report = run_suite(&semi, Suite::Semi, &caps, "semi").unwrap();
            assert!(report.all_hold(), "semi seed {seed}: {:#?}", report.rows);

            let cbv = gen_instance(GenKind::CommonBaseValue, seed, &params).unwrap();
            let report = run_suite(&cbv, Suite::Cbv, &caps, "cbv").unwrap();
            assert!(report.all_hold(), "cbv seed {seed}: {:#?}", report.rows);

            let linear = gen_instance(GenKind::Linear, seed, &params).unwrap();
            let report = run_suite(&linear, Suite::Linear, &caps, "linear").unwrap();
            assert!(report.all_hold(), "linear seed {seed}: {:#?}", report.rows);
        }
    }
}
