//! Certified lower bound on `Δ − cost` over a box of triangles.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::real::{Dual, Interval, Real};
use super::{triangle_terms, BudgetSpec, EdgeKind, Sign, TriangleProfile};
use crate::rounding::{PlusClass, RuleSet};
use crate::{Error, Result};

/// Box `(y_uv, y_uw, y_vw, y_uvw)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

/// `Σ coef·v ≤ rhs` over `(a, b, c, t)`; together these describe the feasibility polytope.
const CONSTRAINTS: [([f64; 4], f64); 11] = [
    ([-1.0, 0.0, 0.0, 1.0], 0.0),
    ([0.0, -1.0, 0.0, 1.0], 0.0),
    ([0.0, 0.0, -1.0, 1.0], 0.0),
    ([1.0, 1.0, 0.0, -1.0], 1.0),
    ([1.0, 0.0, 1.0, -1.0], 1.0),
    ([0.0, 1.0, 1.0, -1.0], 1.0),
    ([-1.0, 1.0, 1.0, 0.0], 1.0),
    ([1.0, -1.0, 1.0, 0.0], 1.0),
    ([1.0, 1.0, -1.0, 0.0], 1.0),
    ([-1.0, -1.0, -1.0, 3.0], 0.0),
    ([1.0, 1.0, 1.0, -1.5], 1.5),
];

/// Slack added to every derived bound so rounding never cuts off a feasible point.
const PROP_SLACK: f64 = 1e-12;

impl Cell {
    pub fn new(lo: [f64; 4], hi: [f64; 4]) -> Result<Self> {
        for i in 0..4 {
            if !(0.0 <= lo[i] && lo[i] <= hi[i] && hi[i] <= 1.0) {
                return Err(Error::validation(alloc::format!(
                    "cell coordinate {i}: [{}, {}] not within [0, 1]",
                    lo[i],
                    hi[i]
                )));
            }
        }
        Ok(Cell { lo, hi })
    }

    pub fn contains(&self, p: &[f64; 4]) -> bool {
        (0..4).all(|i| self.lo[i] <= p[i] && p[i] <= self.hi[i])
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

/// Shrinks the box to a superset of its feasible part by bound propagation; `None` when it is empty.
pub fn truncate_cell(cell: &Cell) -> Option<Cell> {
    let mut lo = cell.lo;
    let mut hi = cell.hi;
    for _ in 0..100 {
        let mut changed = false;
        for (coef, rhs) in CONSTRAINTS {
            let mins: [f64; 4] = core::array::from_fn(|j| (coef[j] * lo[j]).min(coef[j] * hi[j]));
            let total: f64 = mins.iter().sum();
            for i in 0..4 {
                if coef[i] == 0.0 {
                    continue;
                }
                let bound = (rhs - (total - mins[i])) / coef[i];
                if coef[i] > 0.0 && bound + PROP_SLACK < hi[i] {
                    hi[i] = bound + PROP_SLACK;
                    changed = true;
                } else if coef[i] < 0.0 && bound - PROP_SLACK > lo[i] {
                    lo[i] = bound - PROP_SLACK;
                    changed = true;
                }
            }
        }
        if (0..4).any(|i| lo[i] > hi[i]) {
            return None;
        }
        if !changed {
            break;
        }
    }
    Some(Cell { lo, hi })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DTilde {
    /// Certified lower bound.
    pub value: f64,
    /// Smallest sampled value of `Δ − cost` and where it was attained.
    pub sampled_min: f64,
    pub witness: TriangleProfile,
    /// Largest Lipschitz slack subtracted over all pieces.
    pub slack: f64,
}

/// Sub-intervals of `[lo, hi]` on which an edge of the given sign has a single kind.
fn pieces(sign: Sign, lo: f64, hi: f64, rules: &RuleSet) -> Vec<(EdgeKind, f64, f64)> {
    match sign {
        Sign::Minus => alloc::vec![(EdgeKind::Minus(rules.minus), lo, hi)],
        Sign::Plus => {
            // short iff y ≥ s, dependent iff d ≤ y < s
            let s = 1.0 - rules.tau1;
            let d = 1.0 - rules.tau2;
            let mut out = Vec::new();
            if hi >= s {
                out.push((EdgeKind::Plus(PlusClass::Short), lo.max(s), hi));
            }
            if lo.max(d) <= hi && lo.max(d) < s {
                out.push((EdgeKind::Plus(PlusClass::Dependent), lo.max(d), hi.min(s)));
            }
            if lo < d {
                out.push((EdgeKind::Plus(PlusClass::Independent), lo, hi.min(d)));
            }
            out
        }
    }
}

const TARGET_SPACING: f64 = 0.01;
const MAX_POINTS: usize = 6;

fn eval(kinds: [EdgeKind; 3], p: &[f64; 4], c: f64) -> f64 {
    let (cost, delta) = triangle_terms(kinds, [p[0], p[1], p[2]], p[3], c);
    delta - cost
}

struct PieceMin {
    bound: f64,
    sampled: f64,
    at: [f64; 4],
    slack: f64,
}

fn minimize_piece(kinds: [EdgeKind; 3], cell: &Cell, c: f64) -> PieceMin {
    let counts: [usize; 4] = core::array::from_fn(|i| {
        let w = cell.hi[i] - cell.lo[i];
        if w <= 0.0 {
            1
        } else {
            (libm::ceil(w / TARGET_SPACING) as usize + 1).clamp(2, MAX_POINTS)
        }
    });
    let h: [f64; 4] =
        core::array::from_fn(|i| if counts[i] > 1 { (cell.hi[i] - cell.lo[i]) / (counts[i] - 1) as f64 } else { 0.0 });
    let coord = |i: usize, j: usize| if j + 1 == counts[i] { cell.hi[i] } else { cell.lo[i] + h[i] * j as f64 };
    let mut best = f64::INFINITY;
    let mut at = cell.lo;
    for i0 in 0..counts[0] {
        for i1 in 0..counts[1] {
            for i2 in 0..counts[2] {
                for i3 in 0..counts[3] {
                    let p = [coord(0, i0), coord(1, i1), coord(2, i2), coord(3, i3)];
                    let v = eval(kinds, &p, c);
                    if v < best {
                        best = v;
                        at = p;
                    }
                }
            }
        }
    }
    let grid_min = best;
    // coordinate descent from the best grid point
    let mut step = h.iter().copied().fold(0.0, f64::max) / 2.0;
    while step > 1e-9 {
        let mut improved = false;
        for i in 0..4 {
            for dir in [-1.0, 1.0] {
                let mut q = at;
                q[i] = (q[i] + dir * step).clamp(cell.lo[i], cell.hi[i]);
                let v = eval(kinds, &q, c);
                if v < best {
                    best = v;
                    at = q;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    // every point of the box is within h/2 of a grid point in each coordinate
    let vars: [Dual<Interval, 4>; 4] = core::array::from_fn(|i| Dual::var(Interval::new(cell.lo[i], cell.hi[i]), i));
    let (cost, delta) = triangle_terms(kinds, [vars[0], vars[1], vars[2]], vars[3], Dual::<Interval, 4>::cst(c));
    let g = (delta - cost).d;
    let slack: f64 = (0..4).map(|i| g[i].mag() * h[i] / 2.0).sum();
    PieceMin { bound: grid_min.min(best) - slack, sampled: best, at, slack }
}

/// `d̃` restricted to one sign assignment of `(uv, uw, vw)`; `None` when no piece survives truncation.
pub fn d_tilde_signed(cell: &Cell, signs: [Sign; 3], rules: &RuleSet, budgets: &BudgetSpec) -> Option<DTilde> {
    let cell = truncate_cell(cell)?;
    let c = budgets.c_alpha();
    let per_edge: [Vec<(EdgeKind, f64, f64)>; 3] =
        core::array::from_fn(|e| pieces(signs[e], cell.lo[e], cell.hi[e], rules));
    let mut out: Option<DTilde> = None;
    for p0 in &per_edge[0] {
        for p1 in &per_edge[1] {
            for p2 in &per_edge[2] {
                let sub = Cell { lo: [p0.1, p1.1, p2.1, cell.lo[3]], hi: [p0.2, p1.2, p2.2, cell.hi[3]] };
                let Some(sub) = truncate_cell(&sub) else { continue };
                let m = minimize_piece([p0.0, p1.0, p2.0], &sub, c);
                let cand = DTilde {
                    value: m.bound,
                    sampled_min: m.sampled,
                    witness: TriangleProfile::new(signs, [m.at[0], m.at[1], m.at[2]], m.at[3]),
                    slack: m.slack,
                };
                out = Some(match out {
                    None => cand,
                    Some(o) => merge(o, cand),
                });
            }
        }
    }
    out
}

fn merge(a: DTilde, b: DTilde) -> DTilde {
    let slack = a.slack.max(b.slack);
    let value = a.value.min(b.value);
    let (sampled_min, witness) =
        if b.sampled_min < a.sampled_min { (b.sampled_min, b.witness) } else { (a.sampled_min, a.witness) };
    DTilde { value, sampled_min, witness, slack }
}

/// Lower bound on `Δ(T) − cost(T)` over every feasible triangle in the cell and every sign assignment.
pub fn d_tilde(cell: &Cell, rules: &RuleSet, budgets: &BudgetSpec) -> Result<DTilde> {
    let mut out: Option<DTilde> = None;
    for mask in 0..8u8 {
        let signs: [Sign; 3] = core::array::from_fn(|e| if mask >> e & 1 == 0 { Sign::Plus } else { Sign::Minus });
        if let Some(d) = d_tilde_signed(cell, signs, rules, budgets) {
            out = Some(match out {
                None => d,
                Some(o) => merge(o, d),
            });
        }
    }
    out.ok_or(Error::EmptyCell)
}
