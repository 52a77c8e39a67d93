//! Dense linear algebra and seeded sampling shared by every other module.

mod decomp;
mod matrix;
mod random;

pub use decomp::{complement_basis, least_squares, min_norm_solve, null_space, qr_orthonormalize, Lu, RANK_TOL};
pub use matrix::{dot, norm, NormKind, RealMatrix, RealVector};
pub use random::{sample_gaussian_matrix, sample_haar_orthonormal, SeedSpec, SeededRng};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("non-finite entry at position {index}")]
    NonFinite { index: usize },
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("matrix is {rows}x{cols}; need rows >= cols")]
    NotTall { rows: usize, cols: usize },
    #[error("rank deficient: smallest/largest R diagonal ratio {ratio:e}")]
    RankDeficient { ratio: f64 },
    #[error("columns are not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("matrix is singular")]
    Singular,
}
