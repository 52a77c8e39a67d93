//! Basis Pursuit as linear programming.
//!
//! Two problems reduce to [`StandardLp`]:
//!
//! * decoding, the `l1` metric projection `min_{u in Y} ||u - y'||_1` onto a
//!   subspace `Y = range(B)`;
//! * sensing, `min ||g||_1  s.t.  A g = b`.
//!
//! Both use split variables (`a = a+ - a-`, `e = e+ - e-`, `g = g+ - g-`) so the
//! LP stays in standard form.

use crate::linalg::{norm, null_space, NormKind, RealMatrix, RealVector};
use crate::lp::{solve_standard, LpError, LpStatus, StandardLp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("basis columns are not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),
    #[error("measurements are inconsistent")]
    Infeasible,
    #[error("l1 problem reported unbounded")]
    Unbounded,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// An `n`-dimensional subspace of `R^m`, stored as an `m x n` matrix with
/// orthonormal columns. `n = 0` is the zero subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    b: RealMatrix,
}

impl SubspaceBasis {
    pub const ORTHONORMAL_TOL: f64 = 1e-8;

    pub fn new(b: RealMatrix) -> Result<Self, BpError> {
        let defect = b.orthonormality_defect();
        if defect > Self::ORTHONORMAL_TOL || b.cols() > b.rows() {
            return Err(BpError::NotOrthonormal(defect));
        }
        Ok(Self { b })
    }

    pub fn zero(m: usize) -> Self {
        Self { b: RealMatrix::zeros(m, 0) }
    }

    pub fn full(m: usize) -> Self {
        Self { b: RealMatrix::identity(m) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.b.rows()
    }

    pub fn dim(&self) -> usize {
        self.b.cols()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.b
    }

    /// Orthogonal projection `B B^T v`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.b.matvec(&self.b.tr_matvec(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpDecodeResult {
    /// The minimizer, a point of `Y`.
    pub u: RealVector,
    /// Coordinates of `u` in the basis of `Y`.
    pub coefficients: RealVector,
    /// `y' - u`.
    pub residual: RealVector,
    /// `||y' - u||_1`.
    pub objective: f64,
    pub unique_flag: bool,
}

/// `R` linear measurements `b = A f` of an unknown signal `f in R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseProblem {
    a: RealMatrix,
    b: RealVector,
}

impl SenseProblem {
    pub fn new(a: RealMatrix, b: RealVector) -> Result<Self, BpError> {
        if a.rows() != b.dim() {
            return Err(BpError::DimensionMismatch(format!("{} measurement rows but {} values", a.rows(), b.dim())));
        }
        if a.rows() > a.cols() {
            return Err(BpError::DimensionMismatch(format!("{} measurements exceed signal length {}", a.rows(), a.cols())));
        }
        Ok(Self { a, b })
    }

    /// Measures `f` with the rows of `a`.
    pub fn measure(a: RealMatrix, f: &RealVector) -> Result<Self, BpError> {
        if a.cols() != f.dim() {
            return Err(BpError::DimensionMismatch(format!("signal has {} entries, matrix {} columns", f.dim(), a.cols())));
        }
        let b = RealVector::new(a.matvec(f.as_slice())).map_err(|e| BpError::DimensionMismatch(e.to_string()))?;
        Self::new(a, b)
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.a
    }

    pub fn measurements(&self) -> &RealVector {
        &self.b
    }

    pub fn signal_dim(&self) -> usize {
        self.a.cols()
    }

    /// Orthonormal basis of `ker(A)`, the subspace the sensing problem decodes against.
    pub fn kernel_basis(&self) -> Result<SubspaceBasis, BpError> {
        let ns = null_space(&self.a).map_err(LpError::from)?;
        SubspaceBasis::new(ns)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SenseResult {
    pub g: RealVector,
    pub objective: f64,
    pub unique_flag: bool,
}

/// Columns `[a+ (n) | a- (n) | e+ (m) | e- (m)]`, rows `B (a+ - a-) + e+ - e- = y'`,
/// cost `sum(e+ + e-)`.
pub fn reduce_decode_to_lp(y: &SubspaceBasis, y_prime: &RealVector) -> Result<StandardLp, BpError> {
    let (m, n) = (y.ambient_dim(), y.dim());
    if y_prime.dim() != m {
        return Err(BpError::DimensionMismatch(format!("received word has {} entries, subspace lives in R^{m}", y_prime.dim())));
    }
    let vars = 2 * n + 2 * m;
    let mut a = RealMatrix::zeros(m, vars);
    let bm = y.matrix();
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = bm[(i, j)];
            a[(i, n + j)] = -bm[(i, j)];
        }
        a[(i, 2 * n + i)] = 1.0;
        a[(i, 2 * n + m + i)] = -1.0;
    }
    let mut c = vec![0.0; vars];
    c[2 * n..].iter_mut().for_each(|v| *v = 1.0);
    let pairs = (0..n).map(|j| (j, n + j)).collect();
    Ok(StandardLp::new(a, y_prime.clone(), RealVector::from_vec_unchecked(c))?.with_split_pairs(pairs))
}

/// Solves `min_{u in Y} ||u - y'||_1`.
pub fn decode_l1(y: &SubspaceBasis, y_prime: &RealVector) -> Result<BpDecodeResult, BpError> {
    let lp = reduce_decode_to_lp(y, y_prime)?;
    let out = solve_standard(&lp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL)?;
    let x = match out.status {
        LpStatus::Optimal => out.x.expect("optimal outcome carries x"),
        // e+ = max(y', 0), e- = max(-y', 0) is always feasible.
        LpStatus::Infeasible => return Err(BpError::Infeasible),
        LpStatus::Unbounded => return Err(BpError::Unbounded),
    };
    let n = y.dim();
    let coeffs: Vec<f64> = (0..n).map(|j| x[j] - x[n + j]).collect();
    let u = y.matrix().matvec(&coeffs);
    let residual: Vec<f64> = y_prime.iter().zip(&u).map(|(a, b)| a - b).collect();
    Ok(BpDecodeResult {
        objective: norm(&residual, NormKind::L1),
        u: RealVector::from_vec_unchecked(u),
        coefficients: RealVector::from_vec_unchecked(coeffs),
        residual: RealVector::from_vec_unchecked(residual),
        unique_flag: !out.degenerate_optimum_flag,
    })
}

/// Columns `[g+ (m) | g- (m)]`, rows `A (g+ - g-) = b`, cost `sum(g+ + g-)`.
pub fn reduce_sense_to_lp(p: &SenseProblem) -> Result<StandardLp, BpError> {
    let (r, m) = (p.a.rows(), p.a.cols());
    let mut a = RealMatrix::zeros(r, 2 * m);
    for i in 0..r {
        for j in 0..m {
            a[(i, j)] = p.a[(i, j)];
            a[(i, m + j)] = -p.a[(i, j)];
        }
    }
    let c = RealVector::from_vec_unchecked(vec![1.0; 2 * m]);
    Ok(StandardLp::new(a, p.b.clone(), c)?)
}

/// Solves `min ||g||_1  s.t.  A g = b`.
pub fn sense_l1(p: &SenseProblem) -> Result<SenseResult, BpError> {
    let lp = reduce_sense_to_lp(p)?;
    let out = solve_standard(&lp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL)?;
    let x = match out.status {
        LpStatus::Optimal => out.x.expect("optimal outcome carries x"),
        LpStatus::Infeasible => return Err(BpError::Infeasible),
        LpStatus::Unbounded => return Err(BpError::Unbounded),
    };
    let m = p.signal_dim();
    let g: Vec<f64> = (0..m).map(|j| x[j] - x[m + j]).collect();
    Ok(SenseResult {
        objective: norm(&g, NormKind::L1),
        g: RealVector::from_vec_unchecked(g),
        unique_flag: !out.degenerate_optimum_flag,
    })
}
