//! Randomized invariants over the public API, exercised in exact arithmetic
//! so every assertion is an identity rather than a tolerance check.

use num_traits::Zero;
use proptest::collection::vec;
use proptest::prelude::*;

use revcheck_core::decomp::{
    check_tail_prob, check_variance_bound, decompose, semi_independent_thresholds,
};
use revcheck_core::harness::{sandwich_rows, two_point_reduce};
use revcheck_core::mech::{optimal_revenue, verify_menu};
use revcheck_core::myerson::{brev, myerson_price, srev};
use revcheck_core::reduce::{check_reduction_identities, reduce_base_value};
use revcheck_core::{rat, Caps, CorrelationSpec, Dist1D, Rat};

/// A law with small rational support: values `num/den`, weights normalized.
fn arb_dist(max_support: usize, max_num: i64) -> impl Strategy<Value = Dist1D<Rat>> {
    vec((0..=max_num, 1..=3i64, 1..=4i64), 1..=max_support).prop_map(|points| {
        let total: i64 = points.iter().map(|(_, _, w)| w).sum();
        Dist1D::new(
            points
                .into_iter()
                .map(|(num, den, w)| (rat(num, den), rat(w, total)))
                .collect(),
        )
        .expect("weights are positive and sum to one")
    })
}

fn arb_independent(max_items: usize) -> impl Strategy<Value = CorrelationSpec<Rat>> {
    vec(arb_dist(3, 6), 1..=max_items)
        .prop_map(|items| CorrelationSpec::Independent { items })
}

fn arb_semi(max_classes: usize) -> impl Strategy<Value = CorrelationSpec<Rat>> {
    vec((arb_dist(3, 6), 1..=2usize), 1..=max_classes)
        .prop_map(|classes| CorrelationSpec::SemiIndependent { classes })
}

fn arb_cbv(max_items: usize) -> impl Strategy<Value = CorrelationSpec<Rat>> {
    (vec(arb_dist(2, 5), 1..=max_items), arb_dist(2, 5))
        .prop_map(|(items, base)| CorrelationSpec::CommonBaseValue { items, base })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginals_recover_independent_factors(spec in arb_independent(3)) {
        let joint = spec.build_joint(200).unwrap();
        let CorrelationSpec::Independent { items } = &spec else { unreachable!() };
        for (j, law) in items.iter().enumerate() {
            prop_assert_eq!(&joint.marginal(j).unwrap(), law);
        }
    }

    #[test]
    fn value_and_variance_agree_with_sum_law(spec in arb_semi(3)) {
        let joint = spec.build_joint(200).unwrap();
        let sum = joint.sum_dist();
        prop_assert_eq!(joint.val(), sum.mean());
        prop_assert_eq!(joint.variance_sum(), sum.variance());
    }

    #[test]
    fn benchmarks_scale_linearly(law in arb_dist(4, 8), alpha_num in 1..=4i64, alpha_den in 1..=3i64) {
        let alpha = rat(alpha_num, alpha_den);
        let spec = CorrelationSpec::Independent { items: vec![law.clone(), law] };
        let joint = spec.build_joint(200).unwrap();
        let scaled = CorrelationSpec::Independent {
            items: (0..2).map(|j| joint.marginal(j).unwrap().scale(&alpha).unwrap()).collect(),
        }
        .build_joint(200)
        .unwrap();
        prop_assert_eq!(srev(&scaled), alpha.clone() * srev(&joint));
        prop_assert_eq!(brev(&scaled), alpha * brev(&joint));
    }

    #[test]
    fn benchmarks_ignore_item_order(laws in vec(arb_dist(3, 6), 2..=3)) {
        let forward = CorrelationSpec::Independent { items: laws.clone() }
            .build_joint(200)
            .unwrap();
        let mut reversed_laws = laws;
        reversed_laws.reverse();
        let reversed = CorrelationSpec::Independent { items: reversed_laws }
            .build_joint(200)
            .unwrap();
        prop_assert_eq!(srev(&forward), srev(&reversed));
        prop_assert_eq!(brev(&forward), brev(&reversed));
    }

    #[test]
    fn posted_price_is_optimal_over_support(law in arb_dist(5, 10)) {
        let quote = myerson_price(&law);
        prop_assert_eq!(quote.revenue.clone(), quote.price.clone() * law.prob_ge(&quote.price));
        for (v, _) in law.support() {
            prop_assert!(v.clone() * law.prob_ge(v) <= quote.revenue);
        }
    }

    #[test]
    fn two_point_rewrite_keeps_revenue_and_never_exceeds(law in arb_dist(5, 10)) {
        let reduced = two_point_reduce(&law);
        prop_assert!(reduced.support().len() <= 2);
        prop_assert_eq!(
            myerson_price(&reduced).revenue,
            myerson_price(&law).revenue
        );
        // Stochastically below the original: the CDF never drops.
        for (x, _) in reduced.support().iter().chain(law.support()) {
            prop_assert!(reduced.cdf(x) >= law.cdf(x));
        }
    }

    #[test]
    fn variance_bound_holds_for_any_law(law in arb_dist(4, 8)) {
        let quote = myerson_price(&law);
        prop_assume!(!quote.revenue.is_zero());
        let t = law.max_value().clone() / quote.revenue.clone();
        let row = check_variance_bound(&law, &quote.revenue, &t).unwrap();
        prop_assert!(row.holds);
    }
}

proptest! {
    // The cases below solve linear programs, so keep the counts modest.
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn optimum_dominates_simple_benchmarks(spec in arb_independent(2)) {
        let caps = Caps::default();
        let joint = spec.build_joint(caps.max_atoms).unwrap();
        let rev = optimal_revenue(&joint, &caps).unwrap().revenue;
        for row in sandwich_rows(&joint, &rev) {
            prop_assert!(row.describe().holds, "{:?}", row.describe());
        }
    }

    #[test]
    fn optimal_menu_survives_best_response_replay(spec in arb_semi(2)) {
        let caps = Caps::default();
        let joint = spec.build_joint(caps.max_atoms).unwrap();
        let result = optimal_revenue(&joint, &caps).unwrap();
        let replay = verify_menu(&joint, &result.menu).unwrap();
        // Replaying the menu under buyer best response recovers the LP value
        // exactly; truthfulness means no atom prefers another entry.
        prop_assert_eq!(replay.expected_revenue, result.revenue);
        prop_assert!(replay.max_ic_violation.is_zero());
        prop_assert!(replay.ir_ok.iter().all(|&ok| ok));
    }

    #[test]
    fn solver_is_deterministic(spec in arb_independent(2)) {
        let caps = Caps::default();
        let joint = spec.build_joint(caps.max_atoms).unwrap();
        let a = optimal_revenue(&joint, &caps).unwrap();
        let b = optimal_revenue(&joint, &caps).unwrap();
        prop_assert_eq!(a.revenue, b.revenue);
        prop_assert_eq!(a.menu.options(), b.menu.options());
    }

    #[test]
    fn base_value_reduction_identities_hold(spec in arb_cbv(2)) {
        let caps = Caps::default();
        let rm = reduce_base_value(&spec).unwrap();
        let checks = check_reduction_identities(&rm, &caps, false).unwrap();
        prop_assert!(checks.all_hold(), "{:?}", checks.rows());
    }

    #[test]
    fn tail_events_partition_probability(spec in arb_semi(2)) {
        let caps = Caps::default();
        let joint = spec.build_joint(caps.max_atoms).unwrap();
        // Thresholds divide by per-item revenue, so skip degenerate items.
        prop_assume!((0..joint.n_items())
            .all(|j| !joint.marginal(j).unwrap().is_identically_zero()));
        let thresholds = semi_independent_thresholds(&joint).unwrap();
        let report = decompose(&joint, &thresholds, &caps).unwrap();
        for row in check_tail_prob(&report) {
            prop_assert!(row.describe().holds, "{:?}", row.describe());
        }
        // The occurring tail sets (the empty one is the core event) are
        // mutually exclusive and exhaustive.
        let total = report
            .entries
            .iter()
            .fold(Rat::default(), |acc, e| acc + e.prob.clone());
        prop_assert_eq!(total, rat(1, 1));
        prop_assert_eq!(
            report.core.is_some(),
            report.entries.iter().any(|e| e.items.is_empty())
        );
    }
}
