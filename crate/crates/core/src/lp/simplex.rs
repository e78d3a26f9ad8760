//! Dense revised simplex for `min cᵀx, Ax = b, x ≥ 0`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, API_TOL};

const TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_STREAK_FOR_BLAND: usize = 50;

/// Standard-form LP with a column-major dense constraint matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub rows: usize,
    pub cols: usize,
    /// `a[j * rows + i]` is the coefficient of column `j` in row `i`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl LpProblem {
    pub fn new(rows: usize, cols: usize) -> Self {
        LpProblem { rows, cols, a: vec![0.0; rows * cols], b: vec![0.0; rows], c: vec![0.0; cols] }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[j * self.rows + i] = v;
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.a[j * self.rows..(j + 1) * self.rows]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolverReport {
    pub status: String,
    pub objective: f64,
    /// `bᵀπ` with `π = c_B B⁻¹`.
    pub dual_objective: f64,
    pub iterations: usize,
    /// ∞-norm of `Ax − b` together with negative parts of `x`.
    pub max_violation: f64,
    /// Most negative reduced cost `c_j − πᵀA_j` over all columns.
    pub min_reduced_cost: f64,
    #[serde(skip)]
    pub x: Vec<f64>,
    #[serde(skip)]
    pub duals: Vec<f64>,
}

struct Revised<'a> {
    p: &'a LpProblem,
    m: usize,
    /// Row of each artificial column `p.cols + k`.
    art_row: Vec<usize>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Row-major `m × m` basis inverse.
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

impl<'a> Revised<'a> {
    fn ntot(&self) -> usize {
        self.p.cols + self.art_row.len()
    }

    fn load_column(&self, j: usize, out: &mut [f64]) {
        if j < self.p.cols {
            out.copy_from_slice(self.p.column(j));
        } else {
            out.fill(0.0);
            out[self.art_row[j - self.p.cols]] = 1.0;
        }
    }

    fn dot_column(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.p.cols {
            self.p.column(j).iter().zip(v).map(|(a, b)| a * b).sum()
        } else {
            v[self.art_row[j - self.p.cols]]
        }
    }

    /// `B⁻¹ A_j`.
    fn ftran(&self, j: usize, col: &mut [f64], out: &mut [f64]) {
        self.load_column(j, col);
        let m = self.m;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            out[i] = row.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for k in 0..m {
            let ck = cost[self.basis[k]];
            if ck != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for (p, r) in pi.iter_mut().zip(row) {
                    *p += ck * r;
                }
            }
        }
        pi
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut bmat = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            self.load_column(j, &mut col);
            for i in 0..m {
                bmat[i * m + k] = col[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&r1, &r2| libm::fabs(bmat[r1 * m + c]).total_cmp(&libm::fabs(bmat[r2 * m + c])))
                .expect("non-empty range");
            let pv = bmat[piv * m + c];
            if libm::fabs(pv) < 1e-12 {
                return Err(Error::Solver {
                    status: "singular basis".into(),
                    max_violation: f64::NAN,
                    iterations: self.iterations,
                });
            }
            if piv != c {
                for k in 0..m {
                    bmat.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            for k in 0..m {
                bmat[c * m + k] /= pv;
                inv[c * m + k] /= pv;
            }
            for r in 0..m {
                if r != c {
                    let f = bmat[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            bmat[r * m + k] -= f * bmat[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&self.p.b).map(|(a, b)| a * b).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, r: usize, j: usize, d: &[f64], theta: f64) {
        let m = self.m;
        for i in 0..m {
            self.xb[i] -= theta * d[i];
        }
        self.xb[r] = theta;
        let dr = d[r];
        for k in 0..m {
            self.binv[r * m + k] /= dr;
        }
        for i in 0..m {
            if i != r && d[i] != 0.0 {
                let f = d[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[r * m + k];
                }
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    fn optimize(&mut self, cost: &[f64], may_enter: impl Fn(usize) -> bool, max_iter: usize) -> Result<()> {
        let m = self.m;
        let mut col = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut degenerate_streak = 0;
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            if self.iterations >= max_iter {
                return Err(Error::Solver {
                    status: "iteration limit".into(),
                    max_violation: f64::NAN,
                    iterations: self.iterations,
                });
            }
            let pi = self.duals(cost);
            let bland = degenerate_streak >= DEGENERATE_STREAK_FOR_BLAND;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.ntot() {
                if self.is_basic[j] || !may_enter(j) {
                    continue;
                }
                let rc = cost[j] - self.dot_column(j, &pi);
                if rc < -TOL {
                    if bland {
                        entering = Some((j, rc));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| rc < best) {
                        entering = Some((j, rc));
                    }
                }
            }
            let Some((j, _)) = entering else { return Ok(()) };
            self.ftran(j, &mut col, &mut d);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if d[i] > TOL {
                    let ratio = self.xb[i].max(0.0) / d[i];
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, theta)) = leave else {
                return Err(Error::Solver {
                    status: "unbounded".into(),
                    max_violation: f64::NAN,
                    iterations: self.iterations,
                });
            };
            if theta <= 1e-12 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.pivot(r, j, &d, theta);
        }
    }
}

/// Two-phase solve. Rows with negative right-hand side are negated first.
pub fn solve(problem: &LpProblem) -> Result<LpSolverReport> {
    let mut p = problem.clone();
    let m = p.rows;
    for i in 0..m {
        if p.b[i] < 0.0 {
            p.b[i] = -p.b[i];
            for j in 0..p.cols {
                p.a[j * m + i] = -p.a[j * m + i];
            }
        }
    }
    let p = &p;

    // a unit column with nonnegative rhs gives a feasible starting basic variable
    let mut basis = vec![usize::MAX; m];
    for j in 0..p.cols {
        let col = p.column(j);
        let mut hit = None;
        let mut unit = true;
        for (i, &v) in col.iter().enumerate() {
            if v == 1.0 && hit.is_none() {
                hit = Some(i);
            } else if v != 0.0 {
                unit = false;
                break;
            }
        }
        if let (true, Some(i)) = (unit, hit) {
            if basis[i] == usize::MAX {
                basis[i] = j;
            }
        }
    }
    let art_row: Vec<usize> = (0..m).filter(|&i| basis[i] == usize::MAX).collect();
    for (k, &i) in art_row.iter().enumerate() {
        basis[i] = p.cols + k;
    }
    let ntot = p.cols + art_row.len();
    let mut is_basic = vec![false; ntot];
    for &j in &basis {
        is_basic[j] = true;
    }
    let mut lp = Revised {
        p,
        m,
        art_row,
        basis,
        is_basic,
        binv: vec![0.0; m * m],
        xb: vec![0.0; m],
        iterations: 0,
        since_refactor: 0,
    };
    lp.refactor()?;
    let max_iter = 50_000 + 50 * (m + ntot);

    if !lp.art_row.is_empty() {
        let phase1: Vec<f64> = (0..ntot).map(|j| if j >= p.cols { 1.0 } else { 0.0 }).collect();
        lp.optimize(&phase1, |_| true, max_iter)?;
        lp.refactor()?;
        let infeas: f64 = (0..m).filter(|&i| lp.basis[i] >= p.cols).map(|i| lp.xb[i]).sum();
        if infeas > API_TOL {
            return Err(Error::Solver {
                status: "infeasible".into(),
                max_violation: infeas,
                iterations: lp.iterations,
            });
        }
        // drive zero-level artificials out; rows where that fails are redundant and keep them at 0
        let mut col = vec![0.0; m];
        let mut d = vec![0.0; m];
        for r in 0..m {
            if lp.basis[r] < p.cols {
                continue;
            }
            let row: Vec<f64> = lp.binv[r * m..(r + 1) * m].to_vec();
            let cand = (0..p.cols).find(|&j| !lp.is_basic[j] && libm::fabs(lp.dot_column(j, &row)) > 1e-7);
            if let Some(j) = cand {
                lp.ftran(j, &mut col, &mut d);
                lp.pivot(r, j, &d, 0.0);
            }
        }
        lp.refactor()?;
    }

    let cost: Vec<f64> = (0..ntot).map(|j| if j < p.cols { p.c[j] } else { 0.0 }).collect();
    let cols = p.cols;
    lp.optimize(&cost, |j| j < cols, max_iter)?;
    lp.refactor()?;

    let mut x = vec![0.0; p.cols];
    let mut neg: f64 = 0.0;
    for (k, &j) in lp.basis.iter().enumerate() {
        if j < p.cols {
            x[j] = lp.xb[k];
        } else {
            neg = neg.max(libm::fabs(lp.xb[k]));
        }
    }
    for v in &x {
        neg = neg.max(-v);
    }
    let mut resid = vec![0.0; m];
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (r, a) in resid.iter_mut().zip(p.column(j)) {
                *r += a * xj;
            }
        }
    }
    let max_violation = resid.iter().zip(&p.b).map(|(r, b)| libm::fabs(r - b)).fold(neg, f64::max);
    let duals = lp.duals(&cost);
    let objective: f64 = x.iter().zip(&p.c).map(|(a, b)| a * b).sum();
    let dual_objective: f64 = duals.iter().zip(&p.b).map(|(a, b)| a * b).sum();
    let min_reduced_cost = (0..p.cols).map(|j| p.c[j] - lp.dot_column(j, &duals)).fold(0.0, f64::min);

    // flip back duals of negated rows
    let mut duals = duals;
    for i in 0..m {
        if problem.b[i] < 0.0 {
            duals[i] = -duals[i];
        }
    }

    let scale = 1.0 + libm::fabs(objective);
    if max_violation > API_TOL
        || min_reduced_cost < -API_TOL
        || libm::fabs(objective - dual_objective) > API_TOL * scale
    {
        return Err(Error::Solver {
            status: format!(
                "certificate check failed (reduced cost {min_reduced_cost:e}, gap {:e})",
                objective - dual_objective
            ),
            max_violation,
            iterations: lp.iterations,
        });
    }
    Ok(LpSolverReport {
        status: "optimal".into(),
        objective,
        dual_objective,
        iterations: lp.iterations,
        max_violation,
        min_reduced_cost,
        x,
        duals,
    })
}
