//! Householder QR, LU with partial pivoting, and the solvers built on them.

use super::matrix::{dot, norm, NormKind, RealMatrix};
use super::LinalgError;

/// Relative threshold on `|R_kk| / max |R_jj|` below which a matrix is
/// treated as column-rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Householder reflectors of an `m x n` matrix (`m >= n`), kept in
/// column-major form.
struct Householder {
    m: usize,
    /// `vs[k]` has length `m - k` and unit norm (or is all zero for the identity).
    vs: Vec<Vec<f64>>,
    /// Upper-triangular factor, `n x n`, stored row-major.
    r: Vec<f64>,
    n: usize,
}

impl Householder {
    fn factor(a: &RealMatrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        assert!(m >= n, "Householder QR needs rows >= cols");
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut vs = Vec::with_capacity(n);
        for k in 0..n {
            let x = &cols[k][k..];
            let xnorm = norm(x, NormKind::L2);
            let mut v = x.to_vec();
            if xnorm == 0.0 {
                v.iter_mut().for_each(|e| *e = 0.0);
            } else {
                let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
                v[0] -= alpha;
                let vnorm = norm(&v, NormKind::L2);
                if vnorm == 0.0 {
                    v.iter_mut().for_each(|e| *e = 0.0);
                } else {
                    v.iter_mut().for_each(|e| *e /= vnorm);
                }
            }
            for col in cols.iter_mut().skip(k) {
                reflect(&v, &mut col[k..]);
            }
            vs.push(v);
        }
        let mut r = vec![0.0; n * n];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..=j {
                r[i * n + j] = col[i];
            }
        }
        Self { m, vs, r, n }
    }

    /// Applies `H_0 H_1 ... H_{n-1}` to the first `width` columns of the identity.
    fn form_q(&self, width: usize) -> Vec<Vec<f64>> {
        let mut q: Vec<Vec<f64>> = (0..width)
            .map(|j| {
                let mut e = vec![0.0; self.m];
                e[j] = 1.0;
                e
            })
            .collect();
        for k in (0..self.n).rev() {
            for col in q.iter_mut() {
                reflect(&self.vs[k], &mut col[k..]);
            }
        }
        q
    }

    /// Applies `Q^T = H_{n-1} ... H_0` to `b`.
    fn apply_qt(&self, b: &mut [f64]) {
        for k in 0..self.n {
            reflect(&self.vs[k], &mut b[k..]);
        }
    }

    fn diag(&self, k: usize) -> f64 {
        self.r[k * self.n + k]
    }

    fn full_rank(&self) -> Result<(), LinalgError> {
        let max = (0..self.n).map(|k| self.diag(k).abs()).fold(0.0, f64::max);
        let min = (0..self.n).map(|k| self.diag(k).abs()).fold(f64::INFINITY, f64::min);
        if self.n > 0 && (max == 0.0 || min <= RANK_TOL * max) {
            return Err(LinalgError::RankDeficient { ratio: if max == 0.0 { 0.0 } else { min / max } });
        }
        Ok(())
    }
}

fn reflect(v: &[f64], x: &mut [f64]) {
    let s = 2.0 * dot(v, x);
    if s != 0.0 {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi -= s * vi;
        }
    }
}

fn columns_to_matrix(rows: usize, cols: &[Vec<f64>]) -> RealMatrix {
    let mut out = RealMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            out[(i, j)] = *v;
        }
    }
    out
}

/// Thin QR factorization `M = Qo * Ru` of a tall matrix with full column rank.
///
/// `Ru` has a strictly positive diagonal, which pins the factorization down
/// uniquely.
pub fn qr_orthonormalize(m: &RealMatrix) -> Result<(RealMatrix, RealMatrix), LinalgError> {
    if m.rows() < m.cols() {
        return Err(LinalgError::NotTall { rows: m.rows(), cols: m.cols() });
    }
    let h = Householder::factor(m);
    h.full_rank()?;
    let n = h.n;
    let mut q = h.form_q(n);
    let mut r = RealMatrix::from_raw(n, n, h.r.clone());
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for j in k..n {
                r[(k, j)] = -r[(k, j)];
            }
            q[k].iter_mut().for_each(|e| *e = -*e);
        }
    }
    Ok((columns_to_matrix(m.rows(), &q), r))
}

/// Orthonormal basis of the orthogonal complement of the range of `b`.
///
/// `b` must have orthonormal columns (`||B^T B - I||_max <= 1e-8`).
pub fn complement_basis(b: &RealMatrix) -> Result<RealMatrix, LinalgError> {
    let defect = b.orthonormality_defect();
    if defect > 1e-8 || b.rows() < b.cols() {
        return Err(LinalgError::NotOrthonormal { defect });
    }
    let h = Householder::factor(b);
    let q = h.form_q(b.rows());
    Ok(columns_to_matrix(b.rows(), &q[b.cols()..]))
}

/// Orthonormal basis (as columns) of the null space of a full-row-rank `k x N` matrix.
pub fn null_space(a: &RealMatrix) -> Result<RealMatrix, LinalgError> {
    let (k, n) = (a.rows(), a.cols());
    if k > n {
        return Err(LinalgError::NotTall { rows: n, cols: k });
    }
    let at = a.transpose();
    let h = Householder::factor(&at);
    h.full_rank()?;
    let q = h.form_q(n);
    Ok(columns_to_matrix(n, &q[k..]))
}

/// Least-squares solution of `min ||A x - b||_2` for `A` with full column rank.
pub fn least_squares(a: &RealMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() < a.cols() {
        return Err(LinalgError::NotTall { rows: a.rows(), cols: a.cols() });
    }
    assert_eq!(a.rows(), b.len(), "least_squares rhs mismatch");
    let h = Householder::factor(a);
    h.full_rank()?;
    let mut qtb = b.to_vec();
    h.apply_qt(&mut qtb);
    let n = h.n;
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| h.r[i * n + j] * x[j]).sum();
        x[i] = (qtb[i] - s) / h.r[i * n + i];
    }
    Ok(x)
}

/// Minimum-norm solution of the underdetermined system `A x = b` with `A` of
/// full row rank.
pub fn min_norm_solve(a: &RealMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let (k, n) = (a.rows(), a.cols());
    if k > n {
        return Err(LinalgError::NotTall { rows: n, cols: k });
    }
    assert_eq!(k, b.len(), "min_norm_solve rhs mismatch");
    // A^T = Q R  =>  A = R^T Q^T, x = Q R^{-T} b.
    let h = Householder::factor(&a.transpose());
    h.full_rank()?;
    let mut z = vec![0.0; k];
    for i in 0..k {
        let s: f64 = (0..i).map(|j| h.r[j * k + i] * z[j]).sum();
        z[i] = (b[i] - s) / h.r[i * k + i];
    }
    let q = h.form_q(k);
    let mut x = vec![0.0; n];
    for (j, col) in q.iter().enumerate() {
        for (xi, qi) in x.iter_mut().zip(col) {
            *xi += z[j] * qi;
        }
    }
    Ok(x)
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors `a`; fails when a pivot falls below `tol` times the largest
    /// entry of `a`.
    pub fn factor(a: &RealMatrix, tol: f64) -> Result<Self, LinalgError> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "LU needs a square matrix");
        let scale = a.max_abs();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if scale == 0.0 || pmax <= tol * scale {
                return Err(LinalgError::Singular);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / piv;
                if f == 0.0 {
                    lu[i * n + k] = 0.0;
                    continue;
                }
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^T y = c`.
    pub fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n;
        // A = P^T L U, so A^T y = U^T L^T P y = c.
        let mut z = c.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[j * n + i] * z[j]).sum();
            z[i] = (z[i] - s) / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[j * n + i] * z[j]).sum();
            z[i] -= s;
        }
        let mut y = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = z[k];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sample_gaussian_matrix, SeedSpec};

    #[test]
    fn qr_of_identity_is_identity() {
        let (q, r) = qr_orthonormalize(&RealMatrix::identity(3)).unwrap();
        assert!(q.sub(&RealMatrix::identity(3)).max_abs() <= 1e-15);
        assert!(r.sub(&RealMatrix::identity(3)).max_abs() <= 1e-15);
    }

    #[test]
    fn qr_of_positive_diagonal_keeps_scaling() {
        let m = RealMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let (q, r) = qr_orthonormalize(&m).unwrap();
        assert!(q.sub(&RealMatrix::identity(2)).max_abs() <= 1e-15);
        assert!(r.sub(&m).max_abs() <= 1e-15);
    }

    #[test]
    fn qr_of_random_tall_matrix() {
        let m = sample_gaussian_matrix(5, 3, SeedSpec::new(7, 0));
        let (q, r) = qr_orthonormalize(&m).unwrap();
        assert!(q.orthonormality_defect() <= 1e-10);
        assert!(q.matmul(&r).sub(&m).max_abs() <= 1e-10);
        for i in 0..3 {
            assert!(r[(i, i)] > 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn qr_rejects_rank_deficient() {
        let m = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        assert!(matches!(qr_orthonormalize(&m), Err(LinalgError::RankDeficient { .. })));
    }

    #[test]
    fn complement_of_coordinate_plane() {
        let b = RealMatrix::identity(4).select_columns(&[0, 1]);
        let c = complement_basis(&b).unwrap();
        assert_eq!((c.rows(), c.cols()), (4, 2));
        let proj = c.matmul(&c.transpose());
        let mut expected = RealMatrix::zeros(4, 4);
        expected[(2, 2)] = 1.0;
        expected[(3, 3)] = 1.0;
        assert!(proj.sub(&expected).max_abs() <= 1e-12);
    }

    #[test]
    fn complement_in_the_plane() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = RealMatrix::new(2, 1, vec![s, s]).unwrap();
        let c = complement_basis(&b).unwrap();
        assert!((c[(0, 0)] + c[(1, 0)]).abs() <= 1e-12);
        assert!((c[(0, 0)].abs() - s).abs() <= 1e-12);
    }

    #[test]
    fn complement_rejects_non_orthonormal() {
        let b = RealMatrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(matches!(complement_basis(&b), Err(LinalgError::NotOrthonormal { .. })));
    }

    #[test]
    fn lu_solves_both_orientations() {
        let a = RealMatrix::from_rows(&[vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]]).unwrap();
        let lu = Lu::factor(&a, 1e-12).unwrap();
        let x = lu.solve(&[1.0, 2.0, 3.0]);
        let ax = a.matvec(&x);
        for (u, v) in ax.iter().zip([1.0, 2.0, 3.0]) {
            assert!((u - v).abs() < 1e-12);
        }
        let y = lu.solve_transpose(&[1.0, -1.0, 0.5]);
        let aty = a.tr_matvec(&y);
        for (u, v) in aty.iter().zip([1.0, -1.0, 0.5]) {
            assert!((u - v).abs() < 1e-12);
        }
        let sing = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(Lu::factor(&sing, 1e-12), Err(LinalgError::Singular)));
    }

    #[test]
    fn least_squares_and_min_norm() {
        let a = RealMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        // Normal equations: [[2,1],[1,2]] x = [1+3, 2+3] -> x = (1, 2).
        let x = least_squares(&a, &[1.0, 2.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);

        let row = RealMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let x = min_norm_solve(&row, &[2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);

        let ns = null_space(&row).unwrap();
        assert_eq!(ns.cols(), 1);
        assert!((ns[(0, 0)] + ns[(1, 0)]).abs() < 1e-12);
    }
}
