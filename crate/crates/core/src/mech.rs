//! Optimal truthful mechanisms for a known finite-support buyer: the IC/IR
//! linear program for maximum revenue, menu verification against buyer best
//! response, and a sampling cross-check.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::JointDist;
use crate::error::{Error, Result};
use crate::lp::{Constraint, Incremental, LinearProgram, LpStatus, Relation, SolveOptions};
use crate::num::Scalar;
use crate::Caps;

/// One menu entry: a lottery over items and its price.
#[derive(Debug, Clone, PartialEq)]
pub struct MenuOption<T> {
    pub alloc: Vec<T>,
    pub payment: T,
}

/// A posted menu. The zero option (buy nothing, pay nothing) is always
/// implicitly available, so individual rationality is automatic.
#[derive(Debug, Clone, PartialEq)]
pub struct Menu<T> {
    options: Vec<MenuOption<T>>,
}

impl<T: Scalar> Menu<T> {
    pub fn new(options: Vec<MenuOption<T>>) -> Result<Self> {
        for opt in &options {
            for q in &opt.alloc {
                if *q < T::zero() || *q > T::one() {
                    return Err(Error::InvalidMenu(format!(
                        "allocation probability {q} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Menu { options })
    }

    pub fn options(&self) -> &[MenuOption<T>] {
        &self.options
    }

    /// Grand bundle at a single price.
    pub fn bundle(n_items: usize, price: T) -> Self {
        Menu { options: vec![MenuOption { alloc: vec![T::one(); n_items], payment: price }] }
    }

    /// All items priced separately; one option per non-empty subset at the
    /// summed price.
    pub fn separate(prices: &[T]) -> Self {
        let n = prices.len();
        let mut options = Vec::with_capacity((1usize << n) - 1);
        for mask in 1u64..(1u64 << n) {
            let alloc: Vec<T> = (0..n)
                .map(|j| if mask >> j & 1 == 1 { T::one() } else { T::zero() })
                .collect();
            let payment = (0..n)
                .filter(|j| mask >> j & 1 == 1)
                .fold(T::zero(), |acc, j| acc + prices[j].clone());
            options.push(MenuOption { alloc, payment });
        }
        Menu { options }
    }
}

/// Output of [`optimal_revenue`]: the LP value, an optimal menu indexed by
/// atom, and each atom's equilibrium utility.
#[derive(Debug, Clone)]
pub struct RevResult<T> {
    pub revenue: T,
    pub menu: Menu<T>,
    pub per_atom_utility: Vec<T>,
}

/// Solved menu program over class allocation totals: variable layout is
/// `[Q_{i,0}, .., Q_{i,c-1}, p_i]` per atom `i`.
struct MenuSolution<T> {
    assignment: Vec<T>,
    objective_value: T,
    /// Truthfulness pairs `(i, k)` in force when the solve finished.
    active: BTreeSet<(usize, usize)>,
}

/// Lazy-constraint solve of the revenue program over per-class allocation
/// totals. Individual rationality rows are always present; truthfulness rows
/// start from `seed` and grow with each atom's most violated constraint until
/// the solution is fully truthful, which matches the quadratic-size program.
fn solve_menu_lp<T: Scalar>(
    class_values: &[Vec<T>],
    probs: &[T],
    class_sizes: &[usize],
    seed: BTreeSet<(usize, usize)>,
    opts: &SolveOptions<T>,
) -> Result<MenuSolution<T>> {
    let m = probs.len();
    let c = class_sizes.len();
    let nv = m * (c + 1);
    let q_col = |i: usize, cc: usize| i * (c + 1) + cc;
    let p_col = |i: usize| i * (c + 1) + c;

    let mut objective = vec![T::zero(); nv];
    let mut bounds = Vec::with_capacity(nv);
    for (i, prob) in probs.iter().enumerate() {
        for &size in class_sizes {
            bounds.push((T::zero(), Some(T::from_u64(size as u64))));
        }
        bounds.push((T::zero(), None));
        objective[p_col(i)] = prob.clone();
    }

    // u(i reporting k) coefficients: sum_c Q_{k,c} v_{i,c} - p_k.
    let ic_coeffs = |i: usize, k: usize| -> Vec<T> {
        let mut coeffs = vec![T::zero(); nv];
        for cc in 0..c {
            let v = class_values[i][cc].clone();
            coeffs[q_col(i, cc)] = -v.clone();
            coeffs[q_col(k, cc)] = v;
        }
        coeffs[p_col(i)] = T::one();
        coeffs[p_col(k)] = -T::one();
        coeffs
    };

    let mut constraints: Vec<Constraint<T>> = Vec::new();
    for i in 0..m {
        // IR: p_i <= sum_c Q_{i,c} v_{i,c}.
        let mut coeffs = vec![T::zero(); nv];
        for cc in 0..c {
            coeffs[q_col(i, cc)] = -class_values[i][cc].clone();
        }
        coeffs[p_col(i)] = T::one();
        constraints.push(Constraint { coeffs, relation: Relation::Le, rhs: T::zero() });
    }
    let mut active = seed;
    for &(i, k) in &active {
        constraints.push(Constraint {
            coeffs: ic_coeffs(i, k),
            relation: Relation::Le,
            rhs: T::zero(),
        });
    }

    let lp = LinearProgram { objective, constraints, bounds };
    let mut solver = Incremental::new(&lp, opts)?;
    loop {
        if solver.status() != LpStatus::Optimal {
            return Err(Error::Numeric(format!(
                "revenue program reported {:?}; it is feasible and bounded by construction",
                solver.status()
            )));
        }
        let sol = solver.solution();
        let x = sol.assignment;
        let utility = |i: usize, k: usize| -> T {
            let mut u = -x[p_col(k)].clone();
            for cc in 0..c {
                u = u + x[q_col(k, cc)].clone() * class_values[i][cc].clone();
            }
            u
        };
        let mut batch: Vec<(Vec<T>, T)> = Vec::new();
        for i in 0..m {
            let own = utility(i, i);
            let mut worst: Option<(T, usize)> = None;
            for k in 0..m {
                if k == i || active.contains(&(i, k)) {
                    continue;
                }
                let gain = utility(i, k) - own.clone();
                if gain > opts.tol {
                    let better = match &worst {
                        None => true,
                        Some((w, _)) => gain > *w,
                    };
                    if better {
                        worst = Some((gain, k));
                    }
                }
            }
            if let Some((_, k)) = worst {
                active.insert((i, k));
                batch.push((ic_coeffs(i, k), T::zero()));
            }
        }
        if batch.is_empty() {
            return Ok(MenuSolution {
                assignment: x,
                objective_value: sol.objective_value,
                active,
            });
        }
        solver.add_le_rows(&batch)?;
    }
}

/// Runs the menu program in `f64` and keeps the truthfulness pairs that are
/// tight at its optimum. Exact mode starts from these rows, which almost
/// always form the exact active set too, so the expensive rational solves see
/// a near-minimal program instead of discovering the set one round at a time.
fn float_seed_pairs<T: Scalar>(
    class_values: &[Vec<T>],
    probs: &[T],
    class_sizes: &[usize],
) -> BTreeSet<(usize, usize)> {
    let values: Vec<Vec<f64>> =
        class_values.iter().map(|row| row.iter().map(Scalar::to_f64).collect()).collect();
    let probs: Vec<f64> = probs.iter().map(Scalar::to_f64).collect();
    let opts = SolveOptions { tol: f64::feas_tol(), pivot_cap: 200_000 };
    let Ok(sol) = solve_menu_lp(&values, &probs, class_sizes, BTreeSet::new(), &opts) else {
        return BTreeSet::new(); // Guidance only; exact mode recovers without it.
    };
    let m = probs.len();
    let c = class_sizes.len();
    let utility = |i: usize, k: usize| -> f64 {
        let row = &sol.assignment[k * (c + 1)..(k + 1) * (c + 1)];
        (0..c).map(|cc| row[cc] * values[i][cc]).sum::<f64>() - row[c]
    };
    let scale = values
        .iter()
        .flatten()
        .fold(1.0f64, |acc, v| if v.abs() > acc { v.abs() } else { acc });
    let mut tight = BTreeSet::new();
    for &(i, k) in &sol.active {
        let gap = (utility(i, i) - utility(i, k)).abs();
        if i < m && k < m && gap <= 1e-6 * scale {
            tight.insert((i, k));
        }
    }
    tight
}

/// Maximum revenue of any truthful (IC + IR) mechanism, via linear
/// programming over one lottery-and-payment pair per support atom.
///
/// Incentive constraints are generated lazily: the program is re-solved with
/// the most violated truthfulness constraint of each atom until none remain,
/// which yields the same optimum as the full quadratic-size program. In exact
/// mode a floating-point presolve proposes the starting constraint set.
pub fn optimal_revenue<T: Scalar>(d: &JointDist<T>, caps: &Caps) -> Result<RevResult<T>> {
    let m = d.atoms().len();
    let n = d.n_items();
    if m > caps.max_atoms {
        return Err(Error::SupportTooLarge { atoms: m, cap: caps.max_atoms });
    }
    // Items in one similarity class carry equal values on every atom, so any
    // buyer type cares only about the class's total allocation. Solving over
    // those totals (bounded by the class size) shrinks the program; splitting
    // each total evenly recovers a per-item menu with identical utilities.
    let classes = d.classes().to_vec();
    let c = classes.len();
    let class_sizes: Vec<usize> = classes.iter().map(Vec::len).collect();
    let class_values: Vec<Vec<T>> = d
        .atoms()
        .iter()
        .map(|(v, _)| classes.iter().map(|class| v[class[0]].clone()).collect())
        .collect();
    let probs: Vec<T> = d.atoms().iter().map(|(_, p)| p.clone()).collect();
    let mut class_of = vec![0usize; n];
    for (cc, class) in classes.iter().enumerate() {
        for &j in class {
            class_of[j] = cc;
        }
    }

    let seed = if T::EXACT {
        float_seed_pairs(&class_values, &probs, &class_sizes)
    } else {
        BTreeSet::new()
    };
    let opts: SolveOptions<T> = caps.solve_options();
    let sol = solve_menu_lp(&class_values, &probs, &class_sizes, seed, &opts)?;

    let q_col = |i: usize, cc: usize| i * (c + 1) + cc;
    let p_col = |i: usize| i * (c + 1) + c;
    let x = &sol.assignment;
    let options = (0..m)
        .map(|i| MenuOption {
            alloc: (0..n)
                .map(|j| {
                    let cc = class_of[j];
                    x[q_col(i, cc)].clone() / T::from_u64(class_sizes[cc] as u64)
                })
                .collect(),
            payment: x[p_col(i)].clone(),
        })
        .collect();
    let per_atom_utility = (0..m)
        .map(|i| {
            let mut u = -x[p_col(i)].clone();
            for cc in 0..c {
                u = u + x[q_col(i, cc)].clone() * class_values[i][cc].clone();
            }
            u
        })
        .collect();
    Ok(RevResult {
        revenue: sol.objective_value,
        menu: Menu { options },
        per_atom_utility,
    })
}

/// The buyer's chosen entry for one atom. `option` is `None` when the
/// implicit zero option wins.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<T> {
    pub option: Option<usize>,
    pub utility: T,
    pub payment: T,
}

/// Deterministic menu evaluation under buyer best response.
#[derive(Debug, Clone)]
pub struct MenuReport<T> {
    pub expected_revenue: T,
    pub per_atom: Vec<BestResponse<T>>,
    /// Zero by construction: every atom receives its utility-maximizing entry.
    pub max_ic_violation: T,
    /// Per-atom individual rationality; always true thanks to the zero option.
    pub ir_ok: Vec<bool>,
}

fn best_response<T: Scalar>(values: &[T], menu: &Menu<T>) -> Result<BestResponse<T>> {
    let mut best = BestResponse { option: None, utility: T::zero(), payment: T::zero() };
    for (idx, opt) in menu.options().iter().enumerate() {
        if opt.alloc.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "menu option has {} allocations for {} items",
                opt.alloc.len(),
                values.len()
            )));
        }
        let worth = opt
            .alloc
            .iter()
            .zip(values)
            .fold(T::zero(), |acc, (q, v)| acc + q.clone() * v.clone());
        let utility = worth - opt.payment.clone();
        // Maximize utility; break ties toward the higher payment (a buyer
        // indifferent at a posted price buys, matching the pricing module),
        // then toward the lower index. The zero option loses all ties except
        // against itself, consistent with "buy at indifference".
        let wins = match utility.total_cmp(&best.utility) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => match opt.payment.total_cmp(&best.payment) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => best.option.is_none(),
            },
        };
        if wins {
            best = BestResponse { option: Some(idx), utility, payment: opt.payment.clone() };
        }
    }
    Ok(best)
}

/// Evaluates a menu exactly: each atom picks its best-response entry and the
/// report aggregates revenue.
pub fn verify_menu<T: Scalar>(d: &JointDist<T>, menu: &Menu<T>) -> Result<MenuReport<T>> {
    let mut per_atom = Vec::with_capacity(d.atoms().len());
    let mut expected_revenue = T::zero();
    for (values, prob) in d.atoms() {
        let choice = best_response(values, menu)?;
        expected_revenue = expected_revenue + choice.payment.clone() * prob.clone();
        per_atom.push(choice);
    }
    let ir_ok = per_atom.iter().map(|c| c.utility >= T::zero()).collect();
    Ok(MenuReport { expected_revenue, per_atom, max_ic_violation: T::zero(), ir_ok })
}

/// Monte-Carlo estimate of menu revenue from `samples` seeded draws.
/// Returns `(estimate, standard_error)`.
pub fn simulate_menu_revenue<T: Scalar>(
    d: &JointDist<T>,
    menu: &Menu<T>,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::BadParams("need at least one sample".into()));
    }
    let payments: Vec<f64> = d
        .atoms()
        .iter()
        .map(|(values, _)| best_response(values, menu).map(|c| c.payment.to_f64()))
        .collect::<Result<_>>()?;
    let mut cumulative = Vec::with_capacity(d.atoms().len());
    let mut acc = 0.0;
    for (_, p) in d.atoms() {
        acc += p.to_f64();
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let u: f64 = rng.gen();
        let idx = cumulative.partition_point(|c| *c <= u).min(payments.len() - 1);
        let x = payments[idx];
        sum += x;
        sum_sq += x * x;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let std_error = if samples > 1 {
        let var = (sum_sq - nf * mean * mean).max(0.0) / (nf - 1.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    Ok((mean, std_error))
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;
    use super::*;
    use crate::dist::{CorrelationSpec, Dist1D};
    use crate::myerson::{brev, myerson_price, srev};
    use crate::num::{rat, Rat};

    fn uniform12() -> Dist1D<Rat> {
        Dist1D::new(vec![(rat(1, 1), rat(1, 2)), (rat(2, 1), rat(1, 2))]).unwrap()
    }

    fn uniform12_pair() -> JointDist<Rat> {
        CorrelationSpec::Independent { items: vec![uniform12(), uniform12()] }
            .build_joint(200)
            .unwrap()
    }

    #[test]
    fn single_item_matches_posted_price() {
        let d = CorrelationSpec::Independent { items: vec![uniform12()] }
            .build_joint(200)
            .unwrap();
        let r = optimal_revenue(&d, &Caps::default()).unwrap();
        assert_eq!(r.revenue, myerson_price(&uniform12()).revenue);
        assert_eq!(r.revenue, rat(1, 1));
    }

    #[test]
    fn pair_is_sandwiched_between_bundle_and_welfare() {
        let d = uniform12_pair();
        let r = optimal_revenue(&d, &Caps::default()).unwrap();
        assert!(r.revenue >= srev(&d));
        assert!(r.revenue >= brev(&d));
        assert!(r.revenue <= d.val());
        for u in &r.per_atom_utility {
            assert!(*u >= rat(0, 1));
        }
    }

    #[test]
    fn tied_pair_collapses_to_separate_sale() {
        let d = CorrelationSpec::SemiIndependent { classes: vec![(uniform12(), 2)] }
            .build_joint(200)
            .unwrap();
        let r = optimal_revenue(&d, &Caps::default()).unwrap();
        assert_eq!(r.revenue, srev(&d));
        assert_eq!(r.revenue, rat(2, 1));
    }

    #[test]
    fn optimal_menu_verifies_to_the_same_revenue() {
        let d = uniform12_pair();
        let r = optimal_revenue(&d, &Caps::default()).unwrap();
        let report = verify_menu(&d, &r.menu).unwrap();
        assert_eq!(report.expected_revenue, r.revenue);
        assert!(report.ir_ok.iter().all(|ok| *ok));
        assert!(report.max_ic_violation.is_zero());
    }

    #[test]
    fn bundle_menu_reproduces_bundle_benchmark() {
        let d = uniform12_pair();
        let menu = Menu::bundle(2, rat(3, 1));
        let report = verify_menu(&d, &menu).unwrap();
        assert_eq!(report.expected_revenue, brev(&d));
        assert_eq!(report.expected_revenue, rat(9, 4));
        // Atom (1, 2) is indifferent between buying and not; it buys.
        let atom = d.atoms().iter().position(|(v, _)| v == &[rat(1, 1), rat(2, 1)]).unwrap();
        assert_eq!(report.per_atom[atom].option, Some(0));
        assert!(report.per_atom[atom].utility.is_zero());
    }

    #[test]
    fn separate_menu_reproduces_separate_benchmark() {
        let d = uniform12_pair();
        let menu = Menu::separate(&[rat(1, 1), rat(1, 1)]);
        let report = verify_menu(&d, &menu).unwrap();
        assert_eq!(report.expected_revenue, srev(&d));
    }

    #[test]
    fn menu_validation() {
        assert!(Menu::new(vec![MenuOption { alloc: vec![rat(3, 2)], payment: rat(0, 1) }])
            .is_err());
        let d = uniform12_pair();
        let menu = Menu::new(vec![MenuOption { alloc: vec![rat(1, 1)], payment: rat(1, 1) }])
            .unwrap();
        assert!(matches!(verify_menu(&d, &menu), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn support_cap_enforced() {
        let d = uniform12_pair();
        let caps = Caps { max_atoms: 3, ..Caps::default() };
        assert!(matches!(
            optimal_revenue(&d, &caps),
            Err(Error::SupportTooLarge { atoms: 4, cap: 3 })
        ));
    }

    #[test]
    fn simulation_is_deterministic_and_close() {
        let d = uniform12_pair();
        let menu = Menu::bundle(2, rat(3, 1));
        let exact = verify_menu(&d, &menu).unwrap().expected_revenue.to_f64();
        let (a1, se1) = simulate_menu_revenue(&d, &menu, 4000, 11).unwrap();
        let (a2, _) = simulate_menu_revenue(&d, &menu, 4000, 11).unwrap();
        assert_eq!(a1, a2);
        assert!((a1 - exact).abs() <= 4.0 * se1, "estimate {a1} vs exact {exact} (se {se1})");
    }

    #[test]
    fn point_mass_simulation_is_exact() {
        let d = CorrelationSpec::Independent {
            items: vec![Dist1D::point(rat(2, 1)).unwrap()],
        }
        .build_joint(200)
        .unwrap();
        let menu = Menu::bundle(1, rat(2, 1));
        let (est, se) = simulate_menu_revenue(&d, &menu, 1, 0).unwrap();
        assert_eq!(est, 2.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn float_mode_pair_close_to_exact() {
        let d = uniform12_pair().to_scalar::<f64>();
        let r = optimal_revenue(&d, &Caps::default()).unwrap();
        let exact = optimal_revenue(&uniform12_pair(), &Caps::default()).unwrap();
        assert!((r.revenue - exact.revenue.to_f64()).abs() < 1e-7);
    }
}
