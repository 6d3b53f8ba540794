//! Acceptance battery: twelve numbered criteria covering the solver, the
//! benchmarks, the decomposition, the reductions, and the binary itself.
//! Each test prints one `criterion NN PASS/FAIL` line (run with
//! `--nocapture` to see them on success) and enforces its time budget.
//!
//! Tolerances are pinned here, not inherited: exact-mode comparisons use
//! rational arithmetic with zero slack; float-mode feasibility uses
//! `FEAS_TOL`; float-mode inequality records carry the library's relative
//! slack of `1e-7`.

use std::process::Command;
use std::time::{Duration, Instant};

use revcheck_core::decomp::check_variance_bound;
use revcheck_core::harness::{
    check_two_point, gen_dist1d, gen_instance, gen_two_point_family, guarantee_report, run_suite,
    sandwich_rows, scaled_iid_pigeonhole, GenKind, GenParams, GuaranteeBound, Suite,
};
use revcheck_core::mech::optimal_revenue;
use revcheck_core::myerson::{brev, myerson_price, srev};
use revcheck_core::reduce::{check_reduction_identities, reduce_base_value, reduce_linear};
use revcheck_core::{rat, Caps, CorrelationSpec, Dist1D, Ineq, Rat};

/// Float feasibility pinned for criterion 12.
const FEAS_TOL: f64 = 1e-9;

struct Criterion {
    number: u32,
    title: &'static str,
    budget: Option<Duration>,
    start: Instant,
}

impl Criterion {
    fn begin(number: u32, title: &'static str, budget_secs: Option<u64>) -> Self {
        Criterion {
            number,
            title,
            budget: budget_secs.map(Duration::from_secs),
            start: Instant::now(),
        }
    }

    fn finish(self, ok: bool, detail: &str) {
        let elapsed = self.start.elapsed();
        let in_budget = self.budget.map_or(true, |b| elapsed < b);
        let timing = match self.budget {
            Some(b) => format!("{elapsed:.2?} of {b:?}"),
            None => format!("{elapsed:.2?}"),
        };
        let verdict = if ok && in_budget { "PASS" } else { "FAIL" };
        println!(
            "criterion {:02} {verdict} {}: {detail} [{timing}]",
            self.number, self.title
        );
        assert!(ok, "criterion {:02} ({}) failed: {detail}", self.number, self.title);
        assert!(
            in_budget,
            "criterion {:02} ({}) took {elapsed:?}, over its {:?} budget",
            self.number,
            self.title,
            self.budget.unwrap_or_default()
        );
    }
}

fn caps() -> Caps {
    Caps::default()
}

#[test]
fn criterion_01_single_item_optimum_is_the_posted_price() {
    let c = Criterion::begin(1, "single-item LP equals posted price", Some(1));
    let caps = caps();
    let mut matched = 0;
    for seed in 0..200u64 {
        let law = gen_dist1d(seed, 8).unwrap();
        let joint = CorrelationSpec::Independent { items: vec![law.clone()] }
            .build_joint(caps.max_atoms)
            .unwrap();
        let lp = optimal_revenue(&joint, &caps).unwrap().revenue;
        if lp == myerson_price(&law).revenue {
            matched += 1;
        }
    }
    c.finish(matched == 200, &format!("{matched}/200 exact matches, slack 0"));
}

#[test]
fn criterion_02_one_class_revenue_equals_separate_sale() {
    let c = Criterion::begin(2, "one-class LP equals SRev", Some(10));
    let caps = caps();
    let params = GenParams {
        max_classes: 1,
        max_support: 5,
        max_multiplicity: 3,
        ..GenParams::default()
    };
    let mut matched = 0;
    for seed in 0..50u64 {
        let spec = gen_instance(GenKind::SemiIndependent, seed, &params).unwrap();
        let joint = spec.build_joint(caps.max_atoms).unwrap();
        let lp = optimal_revenue(&joint, &caps).unwrap().revenue;
        if lp == srev(&joint) {
            matched += 1;
        }
    }
    c.finish(matched == 50, &format!("{matched}/50 exact matches, slack 0"));
}

#[test]
fn criterion_03_sandwich_holds_exactly_on_every_kind() {
    let c = Criterion::begin(3, "SRev, BRev <= Rev <= Val exactly", None);
    let caps = caps();
    let kinds = [
        GenKind::Independent,
        GenKind::SemiIndependent,
        GenKind::CommonBaseValue,
        GenKind::Linear,
    ];
    let mut instances = 0;
    let mut held = 0;
    for kind in kinds {
        // Common-base-value multiplies one extra law in, so it gets one item
        // fewer to keep every joint inside the exact-arithmetic comfort zone.
        let params = match kind {
            GenKind::CommonBaseValue => GenParams { max_items: 2, ..GenParams::default() },
            _ => GenParams::default(),
        };
        for seed in 0..10u64 {
            let spec = gen_instance(kind, seed, &params).unwrap();
            let joint = spec.build_joint(caps.max_atoms).unwrap();
            let rev = optimal_revenue(&joint, &caps).unwrap().revenue;
            instances += 1;
            if sandwich_rows(&joint, &rev).iter().all(|row| row.holds) {
                held += 1;
            }
        }
    }
    c.finish(
        held == instances,
        &format!("{held}/{instances} instances (4 kinds x 10 seeds), slack 0"),
    );
}

#[test]
fn criterion_04_uniform_pair_fixture() {
    let c = Criterion::begin(4, "uniform{1,2}^2 fixture", None);
    let caps = caps();
    let law = Dist1D::new(vec![(rat(1, 1), rat(1, 2)), (rat(2, 1), rat(1, 2))]).unwrap();
    let joint = CorrelationSpec::Independent { items: vec![law.clone(), law] }
        .build_joint(caps.max_atoms)
        .unwrap();
    let s = srev(&joint);
    let b = brev(&joint);
    let rev = optimal_revenue(&joint, &caps).unwrap().revenue;
    let best = if s >= b { s.clone() } else { b.clone() };
    let six = Ineq::le("guarantee_factor_6", rev.clone(), rat(6, 1) * best);
    let ok = s == rat(2, 1) && b == rat(9, 4) && six.holds;
    c.finish(ok, &format!("srev = {s}, brev = {b}, rev = {rev} <= 6*max, slack 0"));
}

#[test]
fn criterion_05_semi_independent_battery() {
    let c = Criterion::begin(5, "semi-independent factor-6 and decomposition", Some(300));
    let caps = caps();
    let params = GenParams {
        max_classes: 3,
        max_support: 4,
        max_multiplicity: 3,
        ..GenParams::default()
    };
    let mut passed = 0;
    let mut exact = 0;
    for seed in 0..100u64 {
        let spec = gen_instance(GenKind::SemiIndependent, seed, &params).unwrap();
        let report = run_suite(&spec, Suite::Semi, &caps, &format!("semi[{seed}]")).unwrap();
        let has_factor_row = report.rows.iter().any(|r| r.name == "guarantee_factor_6");
        if report.all_hold() && has_factor_row {
            passed += 1;
        }
        if report.mode == "rational" {
            exact += 1;
        }
    }
    c.finish(
        passed == 100,
        &format!("{passed}/100 suites hold ({exact} exact, {} float)", 100 - exact),
    );
}

#[test]
fn criterion_06_common_base_value_guarantee_and_reduction() {
    let c = Criterion::begin(6, "common-base-value factor-12 and reduction", Some(600));
    let caps = caps();
    let params = GenParams::default();
    let mut passed = 0;
    let mut max_ratio = 0.0f64;
    for seed in 0..100u64 {
        let spec = gen_instance(GenKind::CommonBaseValue, seed, &params).unwrap();

        // Closed-form identities in exact arithmetic: equal sum laws, equal
        // bundle revenue, the half relation for separate sale.
        let rm = reduce_base_value(&spec).unwrap();
        let identities = check_reduction_identities(&rm, &caps, false).unwrap();
        let exact_ok = identities.all_hold()
            && identities.srev_half.as_ref().is_some_and(|row| row.holds);

        // The two optimal-revenue comparisons run in float: the ratio cap and
        // monotonicity under the item split.
        let report = guarantee_report::<f64>(&spec.to_scalar(), &caps).unwrap();
        let reduced_joint =
            rm.to_scalar::<f64>().reduced.build_joint(caps.max_atoms).unwrap();
        let reduced_rev = optimal_revenue(&reduced_joint, &caps).unwrap().revenue;
        let monotone = Ineq::le("revenue_not_decreased", report.rev, reduced_rev);
        let float_ok = report.bound == Some(GuaranteeBound::Factor(12))
            && report.holds
            && monotone.holds;

        if exact_ok && float_ok {
            passed += 1;
        }
        max_ratio = max_ratio.max(report.ratio);
    }
    c.finish(
        passed == 100,
        &format!("{passed}/100 (brev equal exactly, max rev/max(srev,brev) = {max_ratio:.3} <= 12)"),
    );
}

#[test]
fn criterion_07_linear_reduction_preserves_structure() {
    let c = Criterion::begin(7, "feature-matrix reduction identities", None);
    let caps = caps();
    let params = GenParams::default();
    let mut passed = 0;
    for seed in 0..50u64 {
        let spec = gen_instance(GenKind::Linear, seed, &params).unwrap();
        let rm = reduce_linear(&spec, &caps).unwrap();
        let identities = check_reduction_identities(&rm, &caps, false).unwrap();
        if identities.sum_dist_equal
            && identities.reduced_semi_independent
            && identities.packaging_conserved
            && identities.brev_equal.holds
        {
            passed += 1;
        }
    }
    c.finish(
        passed == 50,
        &format!("{passed}/50 reductions: sum law, class structure, packaging all exact"),
    );
}

#[test]
fn criterion_08_pigeonhole_prefix_bound() {
    let c = Criterion::begin(8, "two-point prefix pigeonhole", Some(1));
    let caps = caps();
    let mut log_form = 0;
    let mut harmonic = 0;
    for seed in 0..100u64 {
        let family = gen_two_point_family(seed, 64).unwrap();
        let record = scaled_iid_pigeonhole(&family, &caps).unwrap();
        if record.log_form_holds {
            log_form += 1;
        }
        if record.harmonic_row.holds {
            harmonic += 1;
        }
    }
    c.finish(
        log_form == 100 && harmonic == 100,
        &format!("{log_form}/100 log form, {harmonic}/100 exact harmonic form"),
    );
}

#[test]
fn criterion_09_two_point_rewrite_preserves_separate_sale() {
    let c = Criterion::begin(9, "two-point rewrite of independent items", None);
    let caps = caps();
    let params = GenParams::default();
    let mut passed = 0;
    for seed in 0..50u64 {
        let spec = gen_instance(GenKind::Independent, seed, &params).unwrap();
        let check = check_two_point(&spec, &caps).unwrap();
        if check.srev_preserved.holds && check.brev_not_increased.holds && check.dominated {
            passed += 1;
        }
    }
    c.finish(passed == 50, &format!("{passed}/50 rewrites, srev equality at slack 0"));
}

#[test]
fn criterion_10_variance_bound() {
    let c = Criterion::begin(10, "Var <= (2t - 1) c^2", None);
    let mut passed = 0;
    for seed in 0..100u64 {
        let law = gen_dist1d(seed, 8).unwrap();
        let quote = myerson_price(&law);
        let t = law.max_value().clone() / quote.revenue.clone();
        let row = check_variance_bound(&law, &quote.revenue, &t).unwrap();
        if row.holds {
            passed += 1;
        }
    }
    c.finish(passed == 100, &format!("{passed}/100 laws, exact with t = max/c"));
}

#[test]
fn criterion_11_verify_is_byte_deterministic() {
    let c = Criterion::begin(11, "verify output byte-identical across runs", None);
    let args = [
        "verify", "--gen", "semi", "--seeds", "0..3", "--suite", "semi", "--format", "json",
    ];
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_revcheck"))
            .args(args)
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    let ok = first.status.success()
        && second.status.success()
        && first.stdout == second.stdout
        && !first.stdout.is_empty();
    c.finish(ok, &format!("two runs, {} bytes each, identical", first.stdout.len()));
}

/// Sixty atoms over four items with pairwise-distinct value patterns, so
/// nothing merges and every item sits in its own similarity class.
fn scale_instance() -> CorrelationSpec<Rat> {
    let weighted: Vec<(Vec<Rat>, Rat)> = (0..60i64)
        .map(|i| {
            let values = vec![
                rat(i, 4),
                rat((i * 5) % 13, 2),
                rat((i * 3) % 7, 1),
                rat((i * 11) % 9, 4),
            ];
            (values, rat(i % 7 + 1, 1))
        })
        .collect();
    let total: Rat = weighted.iter().map(|(_, w)| w.clone()).sum();
    let atoms = weighted.into_iter().map(|(v, w)| (v, w / total.clone())).collect();
    CorrelationSpec::Explicit { n_items: 4, atoms }
}

#[test]
fn criterion_12_float_scale_run() {
    let c = Criterion::begin(12, "60-atom 4-item float solve", Some(10));
    let caps = caps();
    let joint = scale_instance().to_scalar::<f64>().build_joint(caps.max_atoms).unwrap();
    assert_eq!(joint.atoms().len(), 60);
    assert_eq!(joint.n_items(), 4);

    let result = optimal_revenue(&joint, &caps).unwrap();
    let options = result.menu.options();

    // Feasibility of the returned solution, all within FEAS_TOL: allocations
    // inside [0, 1], truth-telling utilities non-negative (IR) and at least
    // every deviation's utility (IC), and the objective consistent with the
    // payments it sums.
    let mut worst_box = 0.0f64;
    let mut worst_ir = 0.0f64;
    let mut worst_ic = 0.0f64;
    for opt in options {
        for q in &opt.alloc {
            worst_box = worst_box.max(-q).max(q - 1.0);
        }
    }
    for (i, (values, _)) in joint.atoms().iter().enumerate() {
        let own = result.per_atom_utility[i];
        worst_ir = worst_ir.max(-own);
        worst_ic = worst_ic.max(-own); // the implicit zero option
        for opt in options {
            let worth: f64 = opt.alloc.iter().zip(values).map(|(q, v)| q * v).sum();
            worst_ic = worst_ic.max(worth - opt.payment - own);
        }
    }
    let paid: f64 = joint
        .atoms()
        .iter()
        .zip(options)
        .map(|((_, p), opt)| p * opt.payment)
        .sum();
    let objective_gap = (paid - result.revenue).abs() / (1.0 + result.revenue.abs());

    let ok = worst_box <= FEAS_TOL
        && worst_ir <= FEAS_TOL
        && worst_ic <= FEAS_TOL
        && objective_gap <= FEAS_TOL;
    c.finish(
        ok,
        &format!(
            "revenue {:.6}; worst box {worst_box:.2e}, IR {worst_ir:.2e}, IC {worst_ic:.2e} (tol {FEAS_TOL:.0e})",
            result.revenue
        ),
    );
}
