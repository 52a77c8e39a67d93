use crate::linalg::{Lu, RealVector};

use super::{LpError, StandardLp};

/// Upper bound on the number of candidate bases [`enumerate_basic_solutions`] will visit.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BasicSolution {
    pub basis: Vec<usize>,
    pub x: RealVector,
    pub objective: f64,
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Every feasible basic solution of `lp`, in lexicographic order of the basis.
///
/// Bases whose `k x k` column submatrix is numerically singular are skipped,
/// and a basic solution counts as feasible when all its entries are at least
/// `-feas_tol`. When the LP has an optimum, the smallest objective in the list
/// equals it.
pub fn enumerate_basic_solutions(lp: &StandardLp, feas_tol: f64) -> Result<Vec<BasicSolution>, LpError> {
    let (k, n) = (lp.num_rows(), lp.num_vars());
    let count = binomial(n, k);
    if count > ENUMERATION_LIMIT {
        return Err(LpError::TooLarge { count });
    }
    let c = lp.c().as_slice();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let bm = lp.a().select_columns(&idx);
        if let Ok(lu) = Lu::factor(&bm, 1e-10) {
            let xb = lu.solve(lp.b().as_slice());
            if xb.iter().all(|&v| v >= -feas_tol) {
                let mut x = vec![0.0; n];
                for (p, &j) in idx.iter().enumerate() {
                    x[j] = xb[p];
                }
                let objective = idx.iter().zip(&xb).map(|(&j, v)| c[j] * v).sum();
                out.push(BasicSolution { basis: idx.clone(), x: RealVector::from_vec_unchecked(x), objective });
            }
        }
        // Advance to the next k-subset in lexicographic order.
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
    Ok(out)
}
