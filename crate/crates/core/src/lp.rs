//! Self-contained linear-program solver: two-phase primal simplex on a dense
//! tableau, generic over the scalar type. Variable bounds are handled inside
//! the ratio test (nonbasic variables may rest at either bound), so box
//! constraints never become tableau rows. An incremental mode accepts new
//! rows after a solve and restores optimality with dual simplex pivots,
//! which is what cutting-plane loops need. Bland's rule guards against
//! cycling, so rational-mode solves terminate at the exact optimum.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::num::{Rat, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// `maximize objective . x` subject to the row constraints and per-variable
/// bounds `lower <= x_i <= upper` (upper `None` means unbounded above).
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<(T, Option<T>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `objective_value` and `assignment` are meaningful only when `status` is
/// [`LpStatus::Optimal`]; the objective is recomputed from the assignment, so
/// in rational mode it is exact.
#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub objective_value: T,
    pub assignment: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct SolveOptions<T> {
    /// Feasibility and reduced-cost tolerance (zero in rational mode).
    pub tol: T,
    pub pivot_cap: u64,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions { tol: T::feas_tol(), pivot_cap: 1_000_000 }
    }
}

pub fn solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    solve_with(lp, &SolveOptions::default())
}

pub fn solve_with<T: Scalar>(lp: &LinearProgram<T>, opts: &SolveOptions<T>) -> Result<LpSolution<T>> {
    Ok(Incremental::new(lp, opts)?.solution())
}

/// A solved program that accepts further `<=` rows, re-optimizing after each
/// batch with dual simplex pivots from the previous basis instead of a fresh
/// solve.
pub struct Incremental<T> {
    tableau: Tableau<T>,
    objective: Vec<T>,
}

impl<T: Scalar> Incremental<T> {
    pub fn new(lp: &LinearProgram<T>, opts: &SolveOptions<T>) -> Result<Self> {
        let nv = lp.objective.len();
        if lp.bounds.len() != nv {
            return Err(Error::DimensionMismatch(format!(
                "{} bounds for {nv} variables",
                lp.bounds.len()
            )));
        }
        for c in &lp.constraints {
            if c.coeffs.len() != nv {
                return Err(Error::DimensionMismatch(format!(
                    "constraint has {} coefficients for {nv} variables",
                    c.coeffs.len()
                )));
            }
        }
        for (lo, hi) in &lp.bounds {
            if let Some(hi) = hi {
                if hi < lo {
                    return Err(Error::InvalidSpec(
                        "variable lower bound exceeds upper bound".into(),
                    ));
                }
            }
        }
        let mut tableau = Tableau::build(lp, opts);
        tableau.phase1()?;
        if tableau.status == LpStatus::Optimal {
            tableau.phase2(&lp.objective)?;
        }
        Ok(Incremental { tableau, objective: lp.objective.clone() })
    }

    pub fn status(&self) -> LpStatus {
        self.tableau.status
    }

    pub fn solution(&self) -> LpSolution<T> {
        self.tableau.extract(&self.objective)
    }

    /// Appends `coeffs . x <= rhs` rows and restores optimality. The old
    /// basis stays dual feasible, so only the new rows need repair.
    pub fn add_le_rows(&mut self, rows: &[(Vec<T>, T)]) -> Result<()> {
        if self.tableau.status != LpStatus::Optimal {
            return Err(Error::InvalidSpec(
                "rows can only be added to an optimally solved program".into(),
            ));
        }
        for (coeffs, rhs) in rows {
            if coeffs.len() != self.tableau.nv {
                return Err(Error::DimensionMismatch(format!(
                    "constraint has {} coefficients for {} variables",
                    coeffs.len(),
                    self.tableau.nv
                )));
            }
            self.tableau.append_le_row(coeffs, rhs.clone());
        }
        self.tableau.dual_repair()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum RowKind {
    Le,
    Ge,
    Eq,
}

/// Outcome of the bounded ratio test for one entering column.
enum Step<T> {
    /// No row and no bound blocks: the program is unbounded.
    Unbounded,
    /// The entering variable travels all the way to its other bound.
    Flip { t: T },
    /// Row `r`'s basic variable blocks; it leaves at its upper bound when
    /// `to_upper` is set (requiring a complement before the pivot).
    Row { r: usize, t: T, to_upper: bool },
}

/// Dense tableau over columns `[structurals | slacks | artificials]`, with
/// the right-hand side, its anti-degeneracy perturbation, and the basic
/// column of each row held separately so rows and slack columns can be
/// appended after a solve.
struct Tableau<T> {
    body: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    cost: Vec<T>,
    cost_rhs: T,
    nv: usize,
    /// Marks feasibility-phase artificial columns, which are banned from
    /// re-entering once phase 2 starts.
    artificial: Vec<bool>,
    n_cols: usize,
    lower: Vec<T>,
    /// Shifted upper bound per column (`None` above the structural block);
    /// the rhs always holds basic values in the shifted space.
    upper: Vec<Option<T>>,
    /// Columns currently substituted as `u - y`, i.e. variables resting at
    /// (or measured from) their upper bound.
    at_upper: Vec<bool>,
    /// Anti-degeneracy rhs perturbation, pivoted alongside the true rhs but
    /// excluded from the extracted solution. Float mode only: highly
    /// degenerate programs (every rhs zero) otherwise cycle numerically,
    /// since tolerance-based comparisons lose Bland's exactness guarantee.
    pert: Vec<T>,
    cost_pert: T,
    pert_scale: f64,
    tol: T,
    pivot_cap: u64,
    pivots: u64,
    bland: bool,
    stalled: u32,
    status: LpStatus,
    phase: u8,
}

fn pert_value<T: Scalar>(scale: f64, index: usize) -> T {
    if T::EXACT {
        return T::zero();
    }
    let noise = 1.0 + ((index + 1) as f64 * 0.618_033_988_749_894_9).fract();
    let x = scale * 1e-12 * noise;
    T::from_rational(&Rat::from_float(x).unwrap_or_else(Rat::zero))
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>, opts: &SolveOptions<T>) -> Self {
        let nv = lp.objective.len();
        let lower: Vec<T> = lp.bounds.iter().map(|(lo, _)| lo.clone()).collect();

        // Shift to y = x - lower and gather rows.
        let mut raw: Vec<(Vec<T>, RowKind, T)> = Vec::new();
        for c in &lp.constraints {
            let shift = c
                .coeffs
                .iter()
                .zip(&lower)
                .fold(T::zero(), |acc, (a, l)| acc + a.clone() * l.clone());
            let rhs = c.rhs.clone() - shift;
            let kind = match c.relation {
                Relation::Le => RowKind::Le,
                Relation::Eq => RowKind::Eq,
            };
            raw.push((c.coeffs.clone(), kind, rhs));
        }
        // Normalize to non-negative right-hand sides.
        for (coeffs, kind, rhs) in &mut raw {
            if *rhs < T::zero() {
                for a in coeffs.iter_mut() {
                    *a = -a.clone();
                }
                *rhs = -rhs.clone();
                *kind = match *kind {
                    RowKind::Le => RowKind::Ge,
                    RowKind::Ge => RowKind::Le,
                    RowKind::Eq => RowKind::Eq,
                };
            }
        }

        let n_slack = raw.iter().filter(|(_, k, _)| *k != RowKind::Eq).count();
        let n_art = raw.iter().filter(|(_, k, _)| *k != RowKind::Le).count();
        let n_cols = nv + n_slack + n_art;

        let mut upper: Vec<Option<T>> = lp
            .bounds
            .iter()
            .map(|(lo, hi)| hi.as_ref().map(|hi| hi.clone() - lo.clone()))
            .collect();
        upper.resize(n_cols, None);

        let pert_scale = raw
            .iter()
            .map(|(_, _, rhs)| rhs.to_f64().abs())
            .fold(1.0f64, f64::max);

        let mut body = Vec::with_capacity(raw.len());
        let mut rhs_col = Vec::with_capacity(raw.len());
        let mut basis = Vec::with_capacity(raw.len());
        let mut slack_at = nv;
        let mut art_at = nv + n_slack;
        for (coeffs, kind, rhs) in raw {
            let mut row = vec![T::zero(); n_cols];
            row[..nv].clone_from_slice(&coeffs);
            rhs_col.push(rhs);
            match kind {
                RowKind::Le => {
                    row[slack_at] = T::one();
                    basis.push(slack_at);
                    slack_at += 1;
                }
                RowKind::Ge => {
                    row[slack_at] = -T::one();
                    slack_at += 1;
                    row[art_at] = T::one();
                    basis.push(art_at);
                    art_at += 1;
                }
                RowKind::Eq => {
                    row[art_at] = T::one();
                    basis.push(art_at);
                    art_at += 1;
                }
            }
            body.push(row);
        }

        let pert: Vec<T> = (0..body.len()).map(|r| pert_value(pert_scale, r)).collect();
        let mut artificial = vec![false; n_cols];
        for flag in artificial.iter_mut().skip(nv + n_slack) {
            *flag = true;
        }

        Tableau {
            body,
            rhs: rhs_col,
            basis,
            cost: vec![T::zero(); n_cols],
            cost_rhs: T::zero(),
            nv,
            artificial,
            n_cols,
            lower,
            upper,
            at_upper: vec![false; n_cols],
            pert,
            cost_pert: T::zero(),
            pert_scale,
            tol: opts.tol.clone(),
            pivot_cap: opts.pivot_cap,
            pivots: 0,
            bland: false,
            stalled: 0,
            status: LpStatus::Optimal,
            phase: 1,
        }
    }

    /// Feasibility phase: drive the artificial variables to zero.
    fn phase1(&mut self) -> Result<()> {
        if !self.artificial.iter().any(|&a| a) {
            return Ok(());
        }
        self.phase = 1;
        // Phase-1 cost: minimize the sum of artificials.
        self.cost = vec![T::zero(); self.n_cols];
        self.cost_rhs = T::zero();
        self.cost_pert = T::zero();
        for j in 0..self.n_cols {
            if self.artificial[j] {
                self.cost[j] = T::one();
            }
        }
        for r in 0..self.body.len() {
            if !self.artificial[self.basis[r]] {
                continue;
            }
            for j in 0..self.n_cols {
                self.cost[j] = self.cost[j].clone() - self.body[r][j].clone();
            }
            self.cost_rhs = self.cost_rhs.clone() - self.rhs[r].clone();
            self.cost_pert = self.cost_pert.clone() - self.pert[r].clone();
        }
        self.iterate()?;
        if self.status == LpStatus::Unbounded {
            return Err(Error::Numeric("feasibility phase reported unbounded".into()));
        }
        let infeasibility = -self.cost_rhs.clone();
        if infeasibility > self.tol {
            self.status = LpStatus::Infeasible;
            return Ok(());
        }
        self.evict_artificials();
        Ok(())
    }

    /// Optimality phase: minimize the negated objective over the feasible basis.
    fn phase2(&mut self, objective: &[T]) -> Result<()> {
        self.phase = 2;
        self.bland = false;
        self.stalled = 0;
        self.cost = vec![T::zero(); self.n_cols];
        self.cost_rhs = T::zero();
        self.cost_pert = T::zero();
        for (j, c) in objective.iter().enumerate() {
            // A complemented column stands for u - y, so its cost flips sign.
            self.cost[j] = if self.at_upper[j] { c.clone() } else { -c.clone() };
        }
        for r in 0..self.body.len() {
            let b = self.basis[r];
            let cb = self.cost[b].clone();
            if !cb.is_zero() {
                for j in 0..self.n_cols {
                    self.cost[j] = self.cost[j].clone() - cb.clone() * self.body[r][j].clone();
                }
                self.cost_rhs = self.cost_rhs.clone() - cb.clone() * self.rhs[r].clone();
                self.cost_pert = self.cost_pert.clone() - cb * self.pert[r].clone();
            }
        }
        self.iterate()
    }

    fn iterate(&mut self) -> Result<()> {
        loop {
            let Some(entering) = self.choose_entering() else {
                return Ok(());
            };
            let step = self.choose_step(entering);
            if self.pivots >= self.pivot_cap {
                return Err(Error::IterationLimit {
                    pivots: self.pivots,
                    cap: self.pivot_cap,
                    phase: self.phase,
                });
            }
            let t = match &step {
                Step::Unbounded => {
                    self.status = LpStatus::Unbounded;
                    return Ok(());
                }
                Step::Flip { t } | Step::Row { t, .. } => t.clone(),
            };
            if t <= self.tol {
                self.stalled += 1;
                if self.stalled > 64 {
                    self.bland = true;
                }
            } else {
                self.stalled = 0;
            }
            match step {
                Step::Unbounded => unreachable!(),
                Step::Flip { .. } => self.complement(entering),
                Step::Row { r, to_upper, .. } => {
                    if to_upper {
                        // The blocking basic variable leaves at its upper
                        // bound: complement it, then restore the +1 pivot
                        // coefficient by negating the row.
                        let b = self.basis[r];
                        self.complement(b);
                        self.negate_row(r);
                    }
                    self.pivot(r, entering);
                }
            }
            self.pivots += 1;
        }
    }

    fn banned(&self, j: usize) -> bool {
        // Artificials must not re-enter after the feasibility phase.
        self.phase == 2 && self.artificial[j]
    }

    fn choose_entering(&self) -> Option<usize> {
        let threshold = -self.tol.clone();
        if self.bland {
            (0..self.n_cols).find(|&j| !self.banned(j) && self.cost[j] < threshold)
        } else {
            let mut best: Option<usize> = None;
            for j in 0..self.n_cols {
                if self.banned(j) || self.cost[j] >= threshold {
                    continue;
                }
                match best {
                    None => best = Some(j),
                    Some(b) if self.cost[j] < self.cost[b] => best = Some(j),
                    _ => {}
                }
            }
            best
        }
    }

    /// Bounded ratio test: the entering variable rises from zero until a
    /// basic variable hits one of its bounds or the entering variable hits
    /// its own upper bound, whichever is first (ties prefer the bound flip,
    /// then the smallest blocking basis index).
    fn choose_step(&self, entering: usize) -> Step<T> {
        let mut best: Option<(T, usize, bool)> = None; // (t, row, leaves_at_upper)
        for r in 0..self.body.len() {
            let a = &self.body[r][entering];
            let value = self.rhs[r].clone() + self.pert[r].clone();
            let candidate = if *a > self.tol {
                Some((value / a.clone(), false))
            } else if *a < -self.tol.clone() {
                self.upper[self.basis[r]]
                    .as_ref()
                    .map(|u| ((u.clone() - value) / -a.clone(), true))
            } else {
                None
            };
            let Some((t, to_upper)) = candidate else { continue };
            let replace = match &best {
                None => true,
                Some((cur, row, _)) => {
                    t < *cur || (t == *cur && self.basis[r] < self.basis[*row])
                }
            };
            if replace {
                best = Some((t, r, to_upper));
            }
        }
        match (self.upper[entering].clone(), best) {
            (None, None) => Step::Unbounded,
            (Some(u), None) => Step::Flip { t: u },
            (Some(u), Some((t, _, _))) if u <= t => Step::Flip { t: u },
            (_, Some((t, r, to_upper))) => Step::Row { r, t, to_upper },
        }
    }

    /// Substitutes column `j` by its complement `u - y`, moving a variable
    /// resting at one bound to rest at the other.
    fn complement(&mut self, j: usize) {
        let u = self.upper[j].clone().expect("complement requires a finite upper bound");
        if !u.is_zero() {
            for r in 0..self.body.len() {
                let a = self.body[r][j].clone();
                if !a.is_zero() {
                    self.rhs[r] = self.rhs[r].clone() - a * u.clone();
                }
            }
            let a = self.cost[j].clone();
            if !a.is_zero() {
                self.cost_rhs = self.cost_rhs.clone() - a * u.clone();
            }
        }
        for row in self.body.iter_mut() {
            if !row[j].is_zero() {
                row[j] = -row[j].clone();
            }
        }
        self.cost[j] = -self.cost[j].clone();
        self.at_upper[j] = !self.at_upper[j];
    }

    fn negate_row(&mut self, r: usize) {
        for x in self.body[r].iter_mut() {
            if !x.is_zero() {
                *x = -x.clone();
            }
        }
        self.rhs[r] = -self.rhs[r].clone();
        self.pert[r] = -self.pert[r].clone();
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let pivot = self.body[r][e].clone();
        if !pivot.is_one() {
            for x in self.body[r].iter_mut() {
                if !x.is_zero() {
                    *x = x.clone() / pivot.clone();
                }
            }
            self.rhs[r] = self.rhs[r].clone() / pivot.clone();
            self.pert[r] = self.pert[r].clone() / pivot;
        }
        let nz: Vec<usize> = (0..self.n_cols)
            .filter(|&j| !self.body[r][j].is_zero())
            .collect();
        let pivot_row = self.body[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        let pivot_pert = self.pert[r].clone();
        for i in 0..self.body.len() {
            if i == r {
                continue;
            }
            let factor = self.body[i][e].clone();
            if factor.is_zero() {
                continue;
            }
            for &j in &nz {
                self.body[i][j] =
                    self.body[i][j].clone() - factor.clone() * pivot_row[j].clone();
            }
            self.body[i][e] = T::zero();
            self.rhs[i] = self.rhs[i].clone() - factor.clone() * pivot_rhs.clone();
            self.pert[i] = self.pert[i].clone() - factor * pivot_pert.clone();
        }
        let factor = self.cost[e].clone();
        if !factor.is_zero() {
            for &j in &nz {
                self.cost[j] = self.cost[j].clone() - factor.clone() * pivot_row[j].clone();
            }
            self.cost[e] = T::zero();
            self.cost_rhs = self.cost_rhs.clone() - factor.clone() * pivot_rhs;
            self.cost_pert = self.cost_pert.clone() - factor * pivot_pert;
        }
        self.basis[r] = e;
    }

    /// Pivot zero-level artificials out of the basis; drop redundant rows.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.body.len() {
            if !self.artificial[self.basis[r]] {
                r += 1;
                continue;
            }
            let e = (0..self.n_cols)
                .find(|&j| !self.artificial[j] && self.body[r][j].abs() > self.tol);
            match e {
                Some(e) => {
                    self.pivot(r, e);
                    r += 1;
                }
                None => {
                    self.body.remove(r);
                    self.rhs.remove(r);
                    self.pert.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }

    /// Appends `coeffs . x <= rhs` as a new row with a fresh basic slack,
    /// reduced against the current basis. A negative slack value afterwards
    /// is expected; [`Tableau::dual_repair`] restores feasibility.
    fn append_le_row(&mut self, coeffs: &[T], rhs: T) {
        // Shift by the lower bounds, then match the complemented columns.
        let mut shifted = rhs;
        let mut row = vec![T::zero(); self.n_cols + 1];
        for (j, a) in coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            shifted = shifted - a.clone() * self.lower[j].clone();
            if self.at_upper[j] {
                let u = self.upper[j].clone().expect("complemented columns are bounded");
                shifted = shifted - a.clone() * u;
                row[j] = -a.clone();
            } else {
                row[j] = a.clone();
            }
        }
        // New slack column: zero in existing rows, basic in the new row.
        let slack_col = self.n_cols;
        for r in 0..self.body.len() {
            self.body[r].push(T::zero());
        }
        self.cost.push(T::zero());
        self.upper.push(None);
        self.at_upper.push(false);
        self.artificial.push(false);
        self.n_cols += 1;
        row[slack_col] = T::one();

        // Reduce against the basis so existing basic columns stay unit.
        let mut rhs = shifted;
        let mut pert = pert_value::<T>(self.pert_scale, self.body.len() + 7919);
        for r in 0..self.body.len() {
            let factor = row[self.basis[r]].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..self.n_cols {
                let a = self.body[r][j].clone();
                if !a.is_zero() {
                    row[j] = row[j].clone() - factor.clone() * a;
                }
            }
            row[self.basis[r]] = T::zero();
            rhs = rhs - factor.clone() * self.rhs[r].clone();
            pert = pert - factor * self.pert[r].clone();
        }
        row.truncate(self.n_cols);
        self.body.push(row);
        self.rhs.push(rhs);
        self.pert.push(pert);
        self.basis.push(slack_col);
    }

    /// Dual simplex: while some basic value is out of range, exchange it for
    /// the nonbasic column that keeps every reduced cost non-negative. The
    /// cost row is untouched by row additions, so optimality is restored the
    /// moment feasibility is.
    fn dual_repair(&mut self) -> Result<()> {
        let mut stalled = 0u32;
        let mut bland = false;
        loop {
            // Basic variables above their upper bound become ordinary
            // below-zero violations after a complement.
            for r in 0..self.body.len() {
                let b = self.basis[r];
                if let Some(u) = self.upper[b].clone() {
                    if self.rhs[r].clone() + self.pert[r].clone() > u + self.tol.clone() {
                        self.complement(b);
                        self.negate_row(r);
                    }
                }
            }
            let violated = (0..self.body.len())
                .filter(|&r| self.rhs[r].clone() + self.pert[r].clone() < -self.tol.clone());
            let leaving = if bland {
                // Bland-style anti-cycling: smallest leaving basis index.
                violated.min_by_key(|&r| self.basis[r])
            } else {
                violated.min_by(|&a, &b| {
                    let va = self.rhs[a].clone() + self.pert[a].clone();
                    let vb = self.rhs[b].clone() + self.pert[b].clone();
                    va.total_cmp(&vb).then(self.basis[a].cmp(&self.basis[b]))
                })
            };
            let Some(r) = leaving else {
                self.status = LpStatus::Optimal;
                return Ok(());
            };
            if self.pivots >= self.pivot_cap {
                return Err(Error::IterationLimit {
                    pivots: self.pivots,
                    cap: self.pivot_cap,
                    phase: 3,
                });
            }
            // Dual ratio test: the entering column must keep every reduced
            // cost non-negative, so take the smallest cost-per-unit ratio
            // (ties to the smallest column index, which is Bland-safe).
            let mut entering: Option<(T, usize)> = None;
            for j in 0..self.n_cols {
                if self.banned(j) || j == self.basis[r] {
                    continue;
                }
                let a = &self.body[r][j];
                if *a >= -self.tol.clone() {
                    continue;
                }
                let ratio = self.cost[j].clone() / -a.clone();
                let replace = match &entering {
                    None => true,
                    Some((cur, _)) => ratio < *cur,
                };
                if replace {
                    entering = Some((ratio, j));
                }
            }
            let Some((ratio, e)) = entering else {
                // No column can absorb the violation: the added rows made
                // the program infeasible.
                self.status = LpStatus::Infeasible;
                return Ok(());
            };
            if ratio <= self.tol {
                stalled += 1;
                if stalled > 64 {
                    bland = true;
                }
            } else {
                stalled = 0;
            }
            self.pivot(r, e);
            self.pivots += 1;
        }
    }

    fn extract(&self, objective: &[T]) -> LpSolution<T> {
        if self.status != LpStatus::Optimal {
            return LpSolution {
                status: self.status,
                objective_value: T::zero(),
                assignment: Vec::new(),
            };
        }
        let mut y = vec![T::zero(); self.nv];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.nv {
                y[b] = self.rhs[r].clone();
            }
        }
        let assignment: Vec<T> = y
            .into_iter()
            .enumerate()
            .map(|(j, y)| {
                let y = if self.at_upper[j] {
                    self.upper[j].clone().expect("complemented columns are bounded") - y
                } else {
                    y
                };
                y + self.lower[j].clone()
            })
            .collect();
        let objective_value = objective
            .iter()
            .zip(&assignment)
            .fold(T::zero(), |acc, (c, x)| acc + c.clone() * x.clone());
        LpSolution { status: LpStatus::Optimal, objective_value, assignment }
    }
}
