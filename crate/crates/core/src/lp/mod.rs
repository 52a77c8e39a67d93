//! Dense standard-form linear programming: `min c^T x  s.t.  A x = b, x >= 0`.
//!
//! [`solve_standard`] runs a two-phase tableau simplex. Pricing starts with
//! Dantzig's rule and falls back to Bland's rule after a configurable number
//! of pivots, which rules out cycling on degenerate instances. The final
//! primal and dual values are recomputed from a fresh LU factorization of the
//! optimal basis rather than read off the tableau.
//!
//! [`enumerate_basic_solutions`] is a brute-force reference used to validate
//! the solver on small instances.

mod enumerate;
mod simplex;

pub(crate) use enumerate::binomial;
pub use enumerate::{enumerate_basic_solutions, BasicSolution, ENUMERATION_LIMIT};
pub use simplex::{solve_standard, solve_with, SolverOptions};

use crate::linalg::{LinalgError, RealMatrix, RealVector};

pub const DEFAULT_FEAS_TOL: f64 = 1e-9;
pub const DEFAULT_OPT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("more equality rows ({rows}) than variables ({vars})")]
    TooManyRows { rows: usize, vars: usize },
    #[error("pivot limit of {limit} exceeded")]
    IterationLimit { limit: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("enumeration of {count} bases exceeds the limit")]
    TooLarge { count: u128 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `min c^T x  s.t.  A x = b, x >= 0`.
///
/// `split_pairs` optionally lists column pairs `(p, q)` with `A_q = -A_p` and
/// `c_q = -c_p`, i.e. the positive and negative parts of a free variable. The
/// mirror of a basic column always has zero reduced cost, so such columns are
/// skipped when the solver reports degeneracy.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp {
    a: RealMatrix,
    b: RealVector,
    c: RealVector,
    split_pairs: Vec<(usize, usize)>,
}

impl StandardLp {
    pub fn new(a: RealMatrix, b: RealVector, c: RealVector) -> Result<Self, LpError> {
        if a.rows() != b.dim() {
            return Err(LpError::DimensionMismatch(format!("A has {} rows but b has {}", a.rows(), b.dim())));
        }
        if a.cols() != c.dim() {
            return Err(LpError::DimensionMismatch(format!("A has {} columns but c has {}", a.cols(), c.dim())));
        }
        if a.rows() > a.cols() {
            return Err(LpError::TooManyRows { rows: a.rows(), vars: a.cols() });
        }
        Ok(Self { a, b, c, split_pairs: Vec::new() })
    }

    pub fn with_split_pairs(mut self, pairs: Vec<(usize, usize)>) -> Self {
        self.split_pairs = pairs;
        self
    }

    pub fn a(&self) -> &RealMatrix {
        &self.a
    }

    pub fn b(&self) -> &RealVector {
        &self.b
    }

    pub fn c(&self) -> &RealVector {
        &self.c
    }

    pub fn split_pairs(&self) -> &[(usize, usize)] {
        &self.split_pairs
    }

    pub fn num_rows(&self) -> usize {
        self.a.rows()
    }

    pub fn num_vars(&self) -> usize {
        self.a.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Basic optimal solution; present iff `status == Optimal`.
    pub x: Option<RealVector>,
    /// `c^T x` when optimal, `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    /// Dual values `y` with `A^T y <= c` at optimality; zeros otherwise.
    pub dual: RealVector,
    /// Some nonbasic reduced cost is within `opt_tol` of zero, so the optimum
    /// may not be unique.
    pub degenerate_optimum_flag: bool,
    /// Basic column per row at termination (artificial columns are `>= N`).
    pub basis: Vec<usize>,
    pub pivots: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
