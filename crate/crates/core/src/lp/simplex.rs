use crate::linalg::{norm, Lu, NormKind, RealMatrix, RealVector};

use super::{LpError, LpOutcome, LpStatus, StandardLp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL};

/// Knobs for [`solve_with`].
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    /// Smallest tableau entry accepted as a pivot.
    pub pivot_tol: f64,
    /// Dantzig pivots before switching to Bland; `None` means `10 * k`.
    pub dantzig_pivots: Option<usize>,
    /// Total pivot cap; `None` means `50 * (k + N)`.
    pub max_pivots: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: DEFAULT_FEAS_TOL,
            opt_tol: DEFAULT_OPT_TOL,
            pivot_tol: 1e-9,
            dantzig_pivots: None,
            max_pivots: None,
        }
    }
}

pub fn solve_standard(lp: &StandardLp, feas_tol: f64, opt_tol: f64) -> Result<LpOutcome, LpError> {
    solve_with(lp, &SolverOptions { feas_tol, opt_tol, ..SolverOptions::default() })
}

pub fn solve_with(lp: &StandardLp, opts: &SolverOptions) -> Result<LpOutcome, LpError> {
    let mut s = Simplex::new(lp, opts);
    s.run()
}

enum Phase {
    One,
    Two,
}

enum StepResult {
    Optimal,
    Unbounded,
}

struct Simplex<'a> {
    lp: &'a StandardLp,
    opts: &'a SolverOptions,
    k: usize,
    n_real: usize,
    /// Row each artificial column is attached to.
    art_row: Vec<usize>,
    /// Row signs applied so that `b >= 0`.
    row_sign: Vec<f64>,
    /// Sign-normalized `A` (row-major `k x n_real`) and `b`.
    a_norm: Vec<f64>,
    b_norm: Vec<f64>,
    /// Tableau, `k x (width + 1)`, last column is the right-hand side.
    t: Vec<f64>,
    /// Reduced-cost row for the current phase.
    d: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    pivots: usize,
    max_pivots: usize,
    dantzig_pivots: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a StandardLp, opts: &'a SolverOptions) -> Self {
        let (k, n) = (lp.num_rows(), lp.num_vars());
        let a = lp.a().as_slice();
        let mut row_sign = vec![1.0; k];
        let mut a_norm = a.to_vec();
        let mut b_norm = lp.b().as_slice().to_vec();
        for i in 0..k {
            if b_norm[i] < 0.0 {
                row_sign[i] = -1.0;
                b_norm[i] = -b_norm[i];
                a_norm[i * n..(i + 1) * n].iter_mut().for_each(|v| *v = -*v);
            }
        }

        // Crash basis: a column with a single positive entry in row i can start
        // basic in that row. Remaining rows get artificials.
        let mut crash: Vec<Option<usize>> = vec![None; k];
        let mut col_used = vec![false; n];
        for j in 0..n {
            let mut row = None;
            let mut count = 0;
            for i in 0..k {
                if a_norm[i * n + j] != 0.0 {
                    count += 1;
                    row = Some(i);
                }
            }
            if count == 1 {
                let i = row.unwrap();
                if a_norm[i * n + j] > 0.0 && crash[i].is_none() && !col_used[j] {
                    crash[i] = Some(j);
                    col_used[j] = true;
                }
            }
        }
        let art_row: Vec<usize> = (0..k).filter(|&i| crash[i].is_none()).collect();
        let width = n + art_row.len();
        let stride = width + 1;

        let mut t = vec![0.0; k * stride];
        for i in 0..k {
            t[i * stride..i * stride + n].copy_from_slice(&a_norm[i * n..(i + 1) * n]);
            t[i * stride + width] = b_norm[i];
        }
        let mut basis = vec![usize::MAX; k];
        for (a_idx, &i) in art_row.iter().enumerate() {
            t[i * stride + n + a_idx] = 1.0;
            basis[i] = n + a_idx;
        }
        for i in 0..k {
            if let Some(j) = crash[i] {
                let piv = t[i * stride + j];
                t[i * stride..(i + 1) * stride].iter_mut().for_each(|v| *v /= piv);
                basis[i] = j;
            }
        }
        let mut is_basic = vec![false; width];
        for &j in &basis {
            is_basic[j] = true;
        }

        Self {
            lp,
            opts,
            k,
            n_real: n,
            art_row,
            row_sign,
            a_norm,
            b_norm,
            t,
            d: vec![0.0; width],
            basis,
            is_basic,
            pivots: 0,
            max_pivots: opts.max_pivots.unwrap_or(50 * (k + n)),
            dantzig_pivots: opts.dantzig_pivots.unwrap_or(10 * k),
        }
    }

    fn width(&self) -> usize {
        self.n_real + self.art_row.len()
    }

    fn stride(&self) -> usize {
        self.width() + 1
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.stride() + self.width()]
    }

    fn cost(&self, phase: &Phase, j: usize) -> f64 {
        match phase {
            Phase::One => {
                if j >= self.n_real {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if j >= self.n_real {
                    0.0
                } else {
                    self.lp.c()[j]
                }
            }
        }
    }

    fn price(&mut self, phase: &Phase) {
        let (w, stride) = (self.width(), self.stride());
        let mut d: Vec<f64> = (0..w).map(|j| self.cost(phase, j)).collect();
        for i in 0..self.k {
            let cb = self.cost(phase, self.basis[i]);
            if cb == 0.0 {
                continue;
            }
            for (dj, tij) in d.iter_mut().zip(&self.t[i * stride..i * stride + w]) {
                *dj -= cb * tij;
            }
        }
        for &j in &self.basis {
            d[j] = 0.0;
        }
        self.d = d;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let stride = self.stride();
        let piv = self.t[r * stride + q];
        let row: Vec<f64> = self.t[r * stride..(r + 1) * stride].iter().map(|v| v / piv).collect();
        let nz: Vec<usize> = (0..stride).filter(|&j| row[j] != 0.0).collect();
        self.t[r * stride..(r + 1) * stride].copy_from_slice(&row);
        for i in 0..self.k {
            if i == r {
                continue;
            }
            let f = self.t[i * stride + q];
            if f == 0.0 {
                continue;
            }
            let ti = &mut self.t[i * stride..(i + 1) * stride];
            for &j in &nz {
                ti[j] -= f * row[j];
            }
            ti[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in nz.iter().filter(|&&j| j < stride - 1) {
                self.d[j] -= f * row[j];
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        self.pivots += 1;
    }

    fn iterate(&mut self, enter_limit: usize) -> Result<StepResult, LpError> {
        let (stride, w) = (self.stride(), self.width());
        loop {
            let bland = self.pivots >= self.dantzig_pivots;
            let mut q = None;
            let mut best = -self.opts.opt_tol;
            for j in 0..enter_limit {
                if self.is_basic[j] {
                    continue;
                }
                let dj = self.d[j];
                if dj < best {
                    q = Some(j);
                    if bland {
                        break;
                    }
                    best = dj;
                }
            }
            let Some(q) = q else {
                return Ok(StepResult::Optimal);
            };
            if self.pivots >= self.max_pivots {
                return Err(LpError::IterationLimit { limit: self.max_pivots });
            }

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.k {
                let a = self.t[i * stride + q];
                if a <= self.opts.pivot_tol {
                    continue;
                }
                let ratio = self.t[i * stride + w].max(0.0) / a;
                match leave {
                    None => leave = Some((i, ratio, a)),
                    Some((li, lr, la)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr);
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[li]
                            } else {
                                a > la
                            }
                        } else {
                            ratio < lr
                        };
                        if better {
                            leave = Some((i, ratio, a));
                        }
                    }
                }
            }
            let Some((r, _, _)) = leave else {
                return Ok(StepResult::Unbounded);
            };
            self.pivot(r, q);
        }
    }

    /// Pivots zero-level artificials out of the basis where possible.
    fn drive_out_artificials(&mut self) {
        let stride = self.stride();
        let w = self.width();
        for i in 0..self.k {
            if self.basis[i] < self.n_real {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n_real {
                if self.is_basic[j] {
                    continue;
                }
                let v = self.t[i * stride + j].abs();
                if v > self.opts.pivot_tol && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                self.t[i * stride + w] = 0.0;
                self.pivot(i, j);
            }
        }
    }

    /// Basis matrix in the original (unsigned) row space.
    fn basis_matrix(&self) -> RealMatrix {
        let k = self.k;
        let a = self.lp.a();
        let mut bm = RealMatrix::zeros(k, k);
        for (p, &j) in self.basis.iter().enumerate() {
            if j < self.n_real {
                for i in 0..k {
                    bm[(i, p)] = a[(i, j)];
                }
            } else {
                let row = self.art_row[j - self.n_real];
                bm[(row, p)] = self.row_sign[row];
            }
        }
        bm
    }

    /// Recomputes the tableau as `B^{-1} [A | I_art | b]` in the sign-normalized
    /// system.
    fn reinvert(&mut self) -> Result<(), LpError> {
        let (k, n, w, stride) = (self.k, self.n_real, self.width(), self.stride());
        let mut bm = RealMatrix::zeros(k, k);
        for (p, &j) in self.basis.iter().enumerate() {
            if j < n {
                for i in 0..k {
                    bm[(i, p)] = self.a_norm[i * n + j];
                }
            } else {
                bm[(self.art_row[j - n], p)] = 1.0;
            }
        }
        let lu = Lu::factor(&bm, 1e-14).map_err(|_| LpError::NumericalFailure("singular basis on reinversion".into()))?;
        let mut col = vec![0.0; k];
        for j in 0..=w {
            if j < n {
                col.iter_mut().enumerate().for_each(|(i, v)| *v = self.a_norm[i * n + j]);
            } else if j < w {
                col.iter_mut().for_each(|v| *v = 0.0);
                col[self.art_row[j - n]] = 1.0;
            } else {
                col.copy_from_slice(&self.b_norm);
            }
            for (i, v) in lu.solve(&col).into_iter().enumerate() {
                self.t[i * stride + j] = v;
            }
        }
        Ok(())
    }

    fn run(&mut self) -> Result<LpOutcome, LpError> {
        let (k, n) = (self.k, self.n_real);
        let b_scale = 1.0 + norm(self.lp.b().as_slice(), NormKind::Linf);

        if !self.art_row.is_empty() {
            self.price(&Phase::One);
            if let StepResult::Unbounded = self.iterate(self.width())? {
                return Err(LpError::NumericalFailure("phase one reported unbounded".into()));
            }
            let infeas: f64 = (0..k).filter(|&i| self.basis[i] >= n).map(|i| self.rhs(i).max(0.0)).sum();
            if infeas > self.opts.feas_tol * b_scale {
                return Ok(self.terminal(LpStatus::Infeasible));
            }
            self.drive_out_artificials();
        }

        let mut refreshes = 0;
        loop {
            self.price(&Phase::Two);
            if let StepResult::Unbounded = self.iterate(n)? {
                return Ok(self.terminal(LpStatus::Unbounded));
            }
            match self.finish(b_scale)? {
                Some(outcome) => return Ok(outcome),
                None if refreshes < 2 => {
                    refreshes += 1;
                    self.reinvert()?;
                }
                None => return Err(LpError::NumericalFailure("optimality not confirmed after reinversion".into())),
            }
        }
    }

    fn terminal(&self, status: LpStatus) -> LpOutcome {
        LpOutcome {
            status,
            x: None,
            objective: if status == LpStatus::Infeasible { f64::INFINITY } else { f64::NEG_INFINITY },
            dual: RealVector::zeros(self.k),
            degenerate_optimum_flag: false,
            basis: self.basis.clone(),
            pivots: self.pivots,
        }
    }

    /// Recomputes `x` and the duals from the basis and checks optimality.
    /// Returns `None` when the tableau has drifted and needs reinversion.
    fn finish(&self, b_scale: f64) -> Result<Option<LpOutcome>, LpError> {
        let n = self.n_real;
        let feas_tol = self.opts.feas_tol;
        let opt_tol = self.opts.opt_tol;
        let c = self.lp.c().as_slice();
        let a = self.lp.a();

        let bm = self.basis_matrix();
        let lu = Lu::factor(&bm, 1e-14).map_err(|_| LpError::NumericalFailure("singular optimal basis".into()))?;
        let xb = lu.solve(self.lp.b().as_slice());
        let cb: Vec<f64> = self.basis.iter().map(|&j| if j < n { c[j] } else { 0.0 }).collect();
        let y = lu.solve_transpose(&cb);

        let mut x = vec![0.0; n];
        for (p, &j) in self.basis.iter().enumerate() {
            if j < n {
                x[j] = xb[p];
            } else if xb[p].abs() > feas_tol * b_scale {
                return Ok(None);
            }
        }
        if x.iter().any(|&v| v < -feas_tol * b_scale) {
            return Ok(None);
        }
        let residual = a.matvec(&x).iter().zip(self.lp.b().iter()).fold(0.0f64, |m, (ax, b)| m.max((ax - b).abs()));
        if residual > feas_tol * b_scale {
            return Ok(None);
        }
        x.iter_mut().for_each(|v| *v = v.max(0.0));

        let aty = a.tr_matvec(&y);
        let reduced: Vec<f64> = (0..n).map(|j| c[j] - aty[j]).collect();
        let c_scale = 1.0 + norm(c, NormKind::Linf);
        if (0..n).any(|j| !self.is_basic[j] && reduced[j] < -opt_tol * c_scale) {
            return Ok(None);
        }

        let mut mirror = vec![None; n];
        for &(p, q) in self.lp.split_pairs() {
            mirror[p] = Some(q);
            mirror[q] = Some(p);
        }
        let degenerate = (0..n).any(|j| {
            !self.is_basic[j] && reduced[j].abs() <= opt_tol && !mirror[j].is_some_and(|tw| self.is_basic[tw])
        });

        let objective: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
        Ok(Some(LpOutcome {
            status: LpStatus::Optimal,
            x: Some(RealVector::from_vec_unchecked(x)),
            objective,
            dual: RealVector::from_vec_unchecked(y),
            degenerate_optimum_flag: degenerate,
            basis: self.basis.clone(),
            pivots: self.pivots,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(rows: &[Vec<f64>], b: &[f64], c: &[f64]) -> StandardLp {
        StandardLp::new(
            RealMatrix::from_rows(rows).unwrap(),
            RealVector::new(b.to_vec()).unwrap(),
            RealVector::new(c.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn simplest_optimum() {
        let out = solve_standard(&lp(&[vec![1.0, 1.0]], &[1.0], &[1.0, 0.0]), 1e-9, 1e-9).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.x.unwrap().as_slice(), &[0.0, 1.0]);
        assert_eq!(out.objective, 0.0);
    }

    #[test]
    fn sign_contradiction_is_infeasible() {
        let out = solve_standard(&lp(&[vec![1.0, 0.0]], &[-1.0], &[1.0, 1.0]), 1e-9, 1e-9).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        assert!(out.x.is_none());
        let out = solve_standard(&lp(&[vec![1.0]], &[-1.0], &[0.0]), 1e-9, 1e-9).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // x1 - x2 = 1, min -x1.
        let out = solve_standard(&lp(&[vec![1.0, -1.0]], &[1.0], &[-1.0, 0.0]), 1e-9, 1e-9).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn duals_close_the_gap() {
        // min x1 + 2 x2 + 3 x3, x1 + x2 + x3 = 2, x1 - x2 = 0 -> x = (1, 1, 0), obj 3.
        let out = solve_standard(
            &lp(&[vec![1.0, 1.0, 1.0], vec![1.0, -1.0, 0.0]], &[2.0, 0.0], &[1.0, 2.0, 3.0]),
            1e-9,
            1e-9,
        )
        .unwrap();
        assert!(out.is_optimal());
        assert!((out.objective - 3.0).abs() < 1e-12);
        let by: f64 = 2.0 * out.dual[0];
        assert!((by - out.objective).abs() < 1e-12);
        assert!(!out.degenerate_optimum_flag);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let out = solve_standard(
            &lp(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]], &[1.0, 2.0], &[1.0, 2.0, 0.0]),
            1e-9,
            1e-9,
        )
        .unwrap();
        assert!(out.is_optimal());
        assert!((out.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_optimum_is_flagged() {
        // Two columns with equal cost: ties along the edge.
        let out = solve_standard(&lp(&[vec![1.0, 1.0]], &[1.0], &[1.0, 1.0]), 1e-9, 1e-9).unwrap();
        assert!(out.degenerate_optimum_flag);
        // Same LP but the second column declared as the mirror of the first is not flagged.
        let mirrored = lp(&[vec![1.0, -1.0, 1.0]], &[1.0], &[0.0, 0.0, 1.0]).with_split_pairs(vec![(0, 1)]);
        let out = solve_standard(&mirrored, 1e-9, 1e-9).unwrap();
        assert!(out.is_optimal());
        assert!(!out.degenerate_optimum_flag);
    }

    #[test]
    fn bland_only_still_terminates() {
        // Beale's classic cycling example in standard form.
        let rows = vec![
            vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let problem = lp(&rows, &[0.0, 0.0, 1.0], &[-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0]);
        for dantzig in [Some(0), Some(3), None] {
            let opts = SolverOptions { dantzig_pivots: dantzig, ..SolverOptions::default() };
            let out = solve_with(&problem, &opts).unwrap();
            assert!(out.is_optimal());
            assert!((out.objective - (-0.05)).abs() < 1e-12, "{}", out.objective);
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let problem = lp(&[vec![1.0, 1.0, 1.0], vec![1.0, -1.0, 0.0]], &[2.0, 0.0], &[1.0, 2.0, 3.0]);
        let opts = SolverOptions { max_pivots: Some(0), ..SolverOptions::default() };
        assert!(matches!(solve_with(&problem, &opts), Err(LpError::IterationLimit { limit: 0 })));
    }
}
