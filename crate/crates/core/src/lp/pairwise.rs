//! The pairwise relaxation with triangle inequalities.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::simplex::{self, LpProblem, LpSolverReport};
use crate::instance::{pair_index, pairs, FractionalAssignment, Instance};
use crate::{Error, Result};

pub const DEFAULT_MAX_N: usize = 14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseLpSolution {
    pub x: FractionalAssignment,
    pub lp_value: f64,
}

/// Minimizes `obj(x)` over `x ∈ [0,1]` subject to `x_uv ≤ x_uw + x_wv` for all triples.
pub fn solve_pairwise_lp(inst: &Instance, max_n: usize) -> Result<(PairwiseLpSolution, LpSolverReport)> {
    let n = inst.n();
    if n > max_n {
        return Err(Error::Capacity {
            what: "pairwise LP".into(),
            n,
            max_n,
            cost: format!("{} triangle rows", 3 * n * n.saturating_sub(1) * n.saturating_sub(2) / 6),
        });
    }
    let np = n * n.saturating_sub(1) / 2;
    if np == 0 {
        return Ok((
            PairwiseLpSolution { x: FractionalAssignment::new(n), lp_value: 0.0 },
            LpSolverReport {
                status: "optimal".into(),
                objective: 0.0,
                dual_objective: 0.0,
                iterations: 0,
                max_violation: 0.0,
                min_reduced_cost: 0.0,
                x: Vec::new(),
                duals: Vec::new(),
            },
        ));
    }
    let mut triangle_rows: Vec<[usize; 3]> = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            for w in v + 1..n {
                let (uv, uw, vw) = (pair_index(n, u, v), pair_index(n, u, w), pair_index(n, v, w));
                triangle_rows.push([uv, uw, vw]);
                triangle_rows.push([uw, uv, vw]);
                triangle_rows.push([vw, uv, uw]);
            }
        }
    }
    // rows: x_p + s_p = 1, then x_a − x_b − x_c + t = 0
    let rows = np + triangle_rows.len();
    let cols = np + rows;
    let mut p = LpProblem::new(rows, cols);
    for (k, (u, v)) in pairs(n).enumerate() {
        p.c[k] = if inst.is_plus(u, v) { 1.0 } else { -1.0 };
        p.set(k, k, 1.0);
        p.set(k, np + k, 1.0);
        p.b[k] = 1.0;
    }
    for (r, &[a, b, c]) in triangle_rows.iter().enumerate() {
        let row = np + r;
        p.set(row, a, 1.0);
        p.set(row, b, -1.0);
        p.set(row, c, -1.0);
        p.set(row, np + row, 1.0);
    }
    let report = simplex::solve(&p)?;
    let x = FractionalAssignment::from_fn(n, |u, v| report.x[pair_index(n, u, v)].clamp(0.0, 1.0))?;
    let lp_value = inst.num_minus() as f64 + report.objective;
    Ok((PairwiseLpSolution { x, lp_value }, report))
}

/// Largest violation of `x_uv ≤ x_uw + x_wv`.
pub fn triangle_violation(x: &FractionalAssignment) -> f64 {
    let n = x.n();
    let g = |a, b| x.get(a, b).unwrap_or(f64::NAN);
    let mut worst: f64 = 0.0;
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                if u != v && v != w && u != w {
                    worst = worst.max(g(u, v) - g(u, w) - g(w, v));
                }
            }
        }
    }
    worst
}
