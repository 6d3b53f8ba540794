//! Revenue analysis for a single additive buyer over `n` items with
//! finite-support, possibly correlated values: exact simple-mechanism
//! benchmarks (separate sale, grand bundle), the optimal-mechanism linear
//! program, core/tail decompositions, structure-collapsing reductions, and
//! machine checks of the revenue bounds these constructions satisfy.

pub mod decomp;
pub mod dist;
pub mod error;
pub mod harness;
pub mod lp;
pub mod mech;
pub mod myerson;
pub mod num;
pub mod reduce;
pub mod report;

pub use dist::{CorrelationSpec, Dist1D, JointDist};
pub use error::{Error, Result};
pub use num::{parse_rational, rat, Qty, Rat, Scalar};
pub use report::{CheckRow, Ineq, SuiteReport};

/// Size and tolerance limits shared across the pipeline.
#[derive(Debug, Clone)]
pub struct Caps {
    /// Largest joint support a spec may expand to.
    pub max_atoms: usize,
    /// Largest support solved exactly; bigger instances switch to floats.
    pub rational_max_atoms: usize,
    /// Cap on similarity classes during decomposition.
    pub max_classes: usize,
    /// Cap on the item count of a reduced (unpacked) instance.
    pub max_reduced_items: usize,
    /// Simplex pivot budget.
    pub pivot_cap: u64,
    /// Float-mode feasibility tolerance.
    pub tol: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_atoms: 200,
            rational_max_atoms: 40,
            max_classes: 20,
            max_reduced_items: 64,
            pivot_cap: 1_000_000,
            tol: 1e-9,
        }
    }
}

impl Caps {
    /// Solver options in the scalar type of the current pipeline.
    pub fn solve_options<T: Scalar>(&self) -> lp::SolveOptions<T> {
        use num_traits::Zero;
        let tol = if T::EXACT {
            T::zero()
        } else {
            T::from_rational(&Rat::from_float(self.tol).unwrap_or_else(Rat::zero))
        };
        lp::SolveOptions { tol, pivot_cap: self.pivot_cap }
    }
}
