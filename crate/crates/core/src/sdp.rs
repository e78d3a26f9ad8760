//! Factor-revealing SDP: discretization, corner triangles, `Q`/`F` assembly and coalescing.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::lp::ClusterLpSolution;
use crate::rounding::RuleSet;
use crate::triangle::dtilde::{d_tilde, truncate_cell, Cell};
use crate::triangle::BudgetSpec;
use crate::{Error, Result};

pub const DEFAULT_BREAKPOINTS: [f64; 29] = [
    0.0, 0.05, 0.1, 0.2, 0.3, 0.35, 0.38, 0.39, 0.40, 0.405, 0.41, 0.42, 0.44, 0.45, 0.5, 0.55, 0.57, 0.58, 0.6, 0.65,
    0.7, 0.75, 0.78, 0.8, 0.9, 0.95, 0.96, 0.99, 1.0,
];

pub const DEFAULT_ALPHA: f64 = 1.485;

/// Split the `y_uvw` range into `parts` pieces when the two smallest intervals lie in `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineRule {
    pub lo: f64,
    pub hi: f64,
    pub parts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    breakpoints: Vec<f64>,
    /// First matching rule wins; no match means one piece.
    refine: Vec<RefineRule>,
}

pub fn default_breakpoints() -> Discretization {
    Discretization {
        breakpoints: DEFAULT_BREAKPOINTS.to_vec(),
        refine: vec![RefineRule { lo: 0.38, hi: 0.45, parts: 20 }, RefineRule { lo: 0.38, hi: 0.65, parts: 10 }],
    }
}

impl Discretization {
    pub fn new(breakpoints: Vec<f64>, refine: Vec<RefineRule>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::validation("breakpoints must start at 0 and end at 1"));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::validation(format!("breakpoints not strictly increasing at {} >= {}", w[0], w[1])));
        }
        if let Some(r) = refine.iter().find(|r| r.parts == 0 || !(r.lo <= r.hi)) {
            return Err(Error::validation(format!("bad refinement rule {r:?}")));
        }
        Ok(Discretization { breakpoints, refine })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn refine_rules(&self) -> &[RefineRule] {
        &self.refine
    }

    pub fn num_intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    /// Index of `[b_i, b_{i+1})` holding `y`; the last interval is closed.
    pub fn interval_of(&self, y: f64) -> usize {
        let p = self.breakpoints.partition_point(|&b| b <= y);
        p.saturating_sub(1).min(self.num_intervals() - 1)
    }

    /// `[max(0, l_i + l_j − 1, l_i + l_k − 1, l_j + l_k − 1), min(r_i, r_j, r_k)]`.
    pub fn t_range(&self, idx: [usize; 3]) -> Option<(f64, f64)> {
        let [(li, ri), (lj, rj), (lk, rk)] = idx.map(|i| self.interval(i));
        let lo = 0f64.max(li + lj - 1.0).max(li + lk - 1.0).max(lj + lk - 1.0);
        let hi = ri.min(rj).min(rk);
        (lo <= hi).then_some((lo, hi))
    }

    /// Number of `y_uvw` pieces for an ordered cell; decided by its two smallest intervals.
    pub fn t_parts(&self, idx: [usize; 3]) -> usize {
        let (li, ri) = self.interval(idx[0]);
        let (lj, rj) = self.interval(idx[1]);
        self.refine.iter().find(|r| r.lo <= li.min(lj) && ri.max(rj) <= r.hi).map_or(1, |r| r.parts)
    }
}

/// Ordered cell `I_i ≤ I_j ≤ I_k` with one `y_uvw` piece.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpCell {
    pub idx: [usize; 3],
    pub sub: usize,
    pub parts: usize,
    /// Untruncated box.
    pub bbox: Cell,
}

/// `(Head row, Tail row)` interval index of each of the six `C(T)` entries.
pub fn head_tail(idx: [usize; 3]) -> [(usize, usize); 6] {
    let [i, j, k] = idx;
    [(i, j), (j, i), (i, k), (k, i), (j, k), (k, j)]
}

/// Diagonal of `C(T)` at `p = (y_uv, y_uw, y_vw, y_uvw)`.
pub fn c_entries(p: &[f64; 4]) -> [f64; 6] {
    let [a, b, c, t] = *p;
    let c1 = t - a * b;
    let c3 = t - a * c;
    let c5 = t - b * c;
    [c1, c1, c3, c3, c5, c5]
}

/// Adds `weight · Headᵀ diag(vals) Tail` to `m`.
fn scatter(m: &mut Matrix, idx: [usize; 3], vals: &[f64; 6], weight: f64) {
    for (r, (h, t)) in head_tail(idx).into_iter().enumerate() {
        m[(h, t)] += weight * vals[r];
    }
}

impl SdpCell {
    /// Corner points, one per distinct endpoint combination (16, fewer along flat coordinates).
    pub fn corners(&self) -> Vec<[f64; 4]> {
        let mut out = Vec::with_capacity(16);
        let choices: [Vec<f64>; 4] = core::array::from_fn(|d| {
            if self.bbox.lo[d] == self.bbox.hi[d] {
                vec![self.bbox.lo[d]]
            } else {
                vec![self.bbox.lo[d], self.bbox.hi[d]]
            }
        });
        for &a in &choices[0] {
            for &b in &choices[1] {
                for &c in &choices[2] {
                    for &t in &choices[3] {
                        out.push([a, b, c, t]);
                    }
                }
            }
        }
        out
    }

    /// Product-form convex weights of `p` over [`Self::corners`]; exact for multilinear functions.
    pub fn corner_weights(&self, p: &[f64; 4]) -> Vec<f64> {
        let factors: [Vec<f64>; 4] = core::array::from_fn(|d| {
            let (l, r) = (self.bbox.lo[d], self.bbox.hi[d]);
            if l == r {
                vec![1.0]
            } else {
                let s = ((p[d] - l) / (r - l)).clamp(0.0, 1.0);
                vec![1.0 - s, s]
            }
        });
        let mut out = Vec::with_capacity(16);
        for &fa in &factors[0] {
            for &fb in &factors[1] {
                for &fc in &factors[2] {
                    for &ft in &factors[3] {
                        out.push(fa * fb * fc * ft);
                    }
                }
            }
        }
        out
    }
}

/// Nonempty ordered cells with their `y_uvw` pieces.
pub fn enumerate_cells(disc: &Discretization) -> Vec<SdpCell> {
    let t = disc.num_intervals();
    let mut out = Vec::new();
    for i in 0..t {
        for j in i..t {
            for k in j..t {
                let idx = [i, j, k];
                let Some((tlo, thi)) = disc.t_range(idx) else { continue };
                let parts = if tlo == thi { 1 } else { disc.t_parts(idx) };
                for sub in 0..parts {
                    let lo_t = tlo + (thi - tlo) * sub as f64 / parts as f64;
                    let hi_t = if sub + 1 == parts { thi } else { tlo + (thi - tlo) * (sub + 1) as f64 / parts as f64 };
                    let (li, ri) = disc.interval(i);
                    let (lj, rj) = disc.interval(j);
                    let (lk, rk) = disc.interval(k);
                    let bbox = Cell { lo: [li, lj, lk, lo_t], hi: [ri, rj, rk, hi_t] };
                    if truncate_cell(&bbox).is_some() {
                        out.push(SdpCell { idx, sub, parts, bbox });
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpVar {
    /// Index into [`SdpModel::cells`] of the owning cell.
    pub cell: usize,
    pub corner: [f64; 4],
    pub d_tilde: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCell {
    pub cell: SdpCell,
    pub d_tilde: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpModel {
    pub alpha: f64,
    pub rules: String,
    pub disc: Discretization,
    pub cells: Vec<ModelCell>,
    pub vars: Vec<SdpVar>,
    /// Corners seen in more than one cell.
    pub coalesced: usize,
}

const KEY_SCALE: f64 = 1e12;

fn point_key(p: &[f64; 4]) -> [i64; 4] {
    p.map(|v| libm::round(v * KEY_SCALE) as i64)
}

impl SdpModel {
    /// Builds variables from cells and their `d̃`; a corner shared by several cells is kept once,
    /// owned by the cell with the largest `d̃` (earliest on ties).
    pub fn from_cells(alpha: f64, rules: &RuleSet, disc: Discretization, cells: Vec<ModelCell>) -> Result<Self> {
        if let Some(c) = cells.iter().find(|c| !c.d_tilde.is_finite()) {
            return Err(Error::validation(format!("cell {:?} has no finite d̃", c.cell.idx)));
        }
        let mut owner: BTreeMap<[i64; 4], (usize, [f64; 4])> = BTreeMap::new();
        let mut seen = 0usize;
        for (ci, c) in cells.iter().enumerate() {
            for p in c.cell.corners() {
                seen += 1;
                owner
                    .entry(point_key(&p))
                    .and_modify(|o| {
                        if c.d_tilde > cells[o.0].d_tilde {
                            *o = (ci, o.1);
                        }
                    })
                    .or_insert((ci, p));
            }
        }
        let coalesced = seen - owner.len();
        let mut vars: Vec<SdpVar> =
            owner.into_values().map(|(cell, corner)| SdpVar { cell, corner, d_tilde: cells[cell].d_tilde }).collect();
        vars.sort_by(|a, b| a.cell.cmp(&b.cell).then(a.corner.partial_cmp(&b.corner).unwrap()));
        Ok(SdpModel { alpha, rules: rules.name.clone(), disc, cells, vars, coalesced })
    }

    /// Matrix dimension `t` of the `Q` and `F` blocks.
    pub fn dim(&self) -> usize {
        self.disc.num_intervals()
    }

    fn var_idx(&self, v: usize) -> [usize; 3] {
        self.cells[self.vars[v].cell].cell.idx
    }

    /// Upper-triangle entries `(row, col, value)` of variable `v`'s coefficient in `Q`.
    pub fn q_coefficients(&self, v: usize) -> Vec<(usize, usize, f64)> {
        let mut m = BTreeMap::new();
        let vals = c_entries(&self.vars[v].corner);
        for (r, (h, t)) in head_tail(self.var_idx(v)).into_iter().enumerate() {
            *m.entry((h.min(t), h.max(t))).or_insert(0.0) += vals[r] / if h == t { 1.0 } else { 2.0 };
        }
        m.into_iter().map(|((i, j), x)| (i, j, x)).collect()
    }

    /// Upper-triangle entries of variable `v`'s coefficient in `F`.
    pub fn f_coefficients(&self, v: usize) -> Vec<(usize, usize, f64)> {
        let mut m = BTreeMap::new();
        for (h, t) in head_tail(self.var_idx(v)) {
            *m.entry((h.min(t), h.max(t))).or_insert(0.0) += if h == t { 1.0 } else { 0.5 };
        }
        m.into_iter().map(|((i, j), x)| (i, j, x)).collect()
    }

    pub fn q_of(&self, eta: &[f64]) -> Matrix {
        let mut q = Matrix::zeros(self.dim());
        for (v, &e) in eta.iter().enumerate() {
            if e != 0.0 {
                scatter(&mut q, self.var_idx(v), &c_entries(&self.vars[v].corner), e);
            }
        }
        q
    }

    pub fn f_of(&self, eta: &[f64]) -> Matrix {
        let mut f = Matrix::zeros(self.dim());
        for (v, &e) in eta.iter().enumerate() {
            if e != 0.0 {
                scatter(&mut f, self.var_idx(v), &[1.0; 6], e);
            }
        }
        f
    }

    /// Locates the cell of a triangle given with sorted pair values.
    fn locate(&self, p: &[f64; 4], by_idx: &BTreeMap<[usize; 3], Vec<usize>>) -> Option<usize> {
        let idx = [0, 1, 2].map(|d| self.disc.interval_of(p[d]));
        let cands = by_idx.get(&idx)?;
        cands.iter().copied().find(|&c| {
            let b = &self.cells[c].cell.bbox;
            b.lo[3] - 1e-12 <= p[3] && p[3] <= b.hi[3] + 1e-12
        })
    }

    /// Maps weighted triangles to normalized `η` through the corner weights of their cells.
    pub fn census_to_eta(&self, census: &[([f64; 4], f64)]) -> Result<Vec<f64>> {
        let mut by_idx: BTreeMap<[usize; 3], Vec<usize>> = BTreeMap::new();
        for (ci, c) in self.cells.iter().enumerate() {
            by_idx.entry(c.cell.idx).or_default().push(ci);
        }
        let var_of: BTreeMap<[i64; 4], usize> =
            self.vars.iter().enumerate().map(|(v, var)| (point_key(&var.corner), v)).collect();
        let mut eta = vec![0.0; self.vars.len()];
        let mut total = 0.0;
        for (p, w) in census {
            let c = self
                .locate(p, &by_idx)
                .ok_or_else(|| Error::validation(format!("triangle {p:?} lies in no model cell")))?;
            let cell = &self.cells[c].cell;
            for (corner, lambda) in cell.corners().iter().zip(cell.corner_weights(p)) {
                let v = var_of[&point_key(corner)];
                eta[v] += w * lambda;
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::validation("empty census"));
        }
        for e in &mut eta {
            *e /= total;
        }
        Ok(eta)
    }
}

/// Serial model assembly; cells whose pieces all vanish are dropped.
pub fn assemble_matrices(disc: &Discretization, rules: &RuleSet, budgets: &BudgetSpec) -> Result<SdpModel> {
    let cells = enumerate_cells(disc)
        .into_iter()
        .filter_map(|cell| match d_tilde(&cell.bbox, rules, budgets) {
            Ok(d) => Some(Ok(ModelCell { cell, d_tilde: d.value })),
            Err(Error::EmptyCell) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<Vec<_>>>()?;
    SdpModel::from_cells(budgets.alpha, rules, disc.clone(), cells)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaEvaluation {
    pub objective: f64,
    pub min_eig_q: f64,
    pub min_eig_f: f64,
    pub sum: f64,
}

pub fn evaluate_eta(model: &SdpModel, eta: &[f64]) -> Result<EtaEvaluation> {
    if eta.len() != model.vars.len() {
        return Err(Error::validation(format!(
            "eta has {} entries, model has {} variables",
            eta.len(),
            model.vars.len()
        )));
    }
    if let Some((i, v)) = eta.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::validation(format!("eta[{i}] = {v} is negative or not finite")));
    }
    let objective = eta.iter().zip(&model.vars).map(|(e, v)| e * v.d_tilde).sum();
    Ok(EtaEvaluation {
        objective,
        min_eig_q: model.q_of(eta).min_eigenvalue(),
        min_eig_f: model.f_of(eta).min_eigenvalue(),
        sum: eta.iter().sum(),
    })
}

/// Every triangle of a solution as sorted `(y, y', y'', y_uvw)` with weight 1, every pair as
/// `(y, y, 1, y)`, and `(1, 1, 1, 1)` with weight `n/6`.
pub fn triangle_census(sol: &ClusterLpSolution) -> Vec<([f64; 4], f64)> {
    let n = sol.n();
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let y = sol.y_pair(u, v);
            out.push(([y, y, 1.0, y], 1.0));
            for w in v + 1..n {
                let mut ys = [sol.y_pair(u, v), sol.y_pair(u, w), sol.y_pair(v, w)];
                ys.sort_by(f64::total_cmp);
                out.push(([ys[0], ys[1], ys[2], sol.y_triple(u, v, w)], 1.0));
            }
        }
    }
    out.push(([1.0; 4], n as f64 / 6.0));
    out
}

/// `Σ_T w_T Headᵀ C(T) Tail` and `Σ_T w_T Headᵀ A Tail` over a census, each triangle in its own cell.
pub fn census_matrices(disc: &Discretization, census: &[([f64; 4], f64)]) -> (Matrix, Matrix) {
    let t = disc.num_intervals();
    let mut q = Matrix::zeros(t);
    let mut f = Matrix::zeros(t);
    for (p, w) in census {
        let idx = [0, 1, 2].map(|d| disc.interval_of(p[d]));
        scatter(&mut q, idx, &c_entries(p), *w);
        scatter(&mut f, idx, &[1.0; 6], *w);
    }
    (q, f)
}

/// `Σ_u Q_u` and `Σ_u F_u` straight from their definitions over all `(v, w) ∈ V²`.
pub fn empirical_matrices(disc: &Discretization, sol: &ClusterLpSolution) -> (Matrix, Matrix) {
    let n = sol.n();
    let t = disc.num_intervals();
    let mut q = Matrix::zeros(t);
    let mut f = Matrix::zeros(t);
    for u in 0..n {
        let mut freq = vec![0.0; t];
        for v in 0..n {
            freq[disc.interval_of(sol.y_pair(u, v))] += 1.0;
            for w in 0..n {
                let (yv, yw) = (sol.y_pair(u, v), sol.y_pair(u, w));
                q[(disc.interval_of(yv), disc.interval_of(yw))] += sol.y_triple(u, v, w) - yv * yw;
            }
        }
        for a in 0..t {
            for b in 0..t {
                f[(a, b)] += freq[a] * freq[b];
            }
        }
    }
    (q, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_random;
    use crate::lp::solve_cluster_lp_exact;
    use crate::rng_from_seed;
    use rand::Rng as _;

    #[test]
    fn default_discretization_shape() {
        let d = default_breakpoints();
        assert_eq!(d.num_intervals(), 28);
        assert!(d.breakpoints().windows(2).all(|w| w[0] < w[1]));
        assert!((0..28).any(|i| d.interval(i).1 == 0.40));
        assert_eq!(d.interval_of(0.40), 8);
        assert_eq!(d.interval(8), (0.40, 0.405));
        assert_eq!(d.interval_of(1.0), 27);
        assert_eq!(d.interval_of(0.0), 0);
        assert_eq!(d.t_parts([d.interval_of(0.40), d.interval_of(0.43), 27]), 20);
        assert_eq!(d.t_parts([d.interval_of(0.40), d.interval_of(0.6), 27]), 10);
        assert_eq!(d.t_parts([d.interval_of(0.2), d.interval_of(0.6), 27]), 1);
        assert!(Discretization::new(vec![0.0, 0.5, 0.5, 1.0], vec![]).is_err());
        assert!(Discretization::new(vec![0.1, 1.0], vec![]).is_err());
    }

    fn random_cell(rng: &mut crate::Rng, cells: &[SdpCell]) -> SdpCell {
        cells[rng.random_range(0..cells.len())]
    }

    #[test]
    fn multilinear_reconstruction() {
        let cells = enumerate_cells(&default_breakpoints());
        let mut rng = rng_from_seed(5);
        for _ in 0..50 {
            let cell = random_cell(&mut rng, &cells);
            let corners = cell.corners();
            for _ in 0..200 {
                let p: [f64; 4] = core::array::from_fn(|d| {
                    cell.bbox.lo[d] + (cell.bbox.hi[d] - cell.bbox.lo[d]) * rng.random::<f64>()
                });
                let lam = cell.corner_weights(&p);
                assert!((lam.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let direct = c_entries(&p);
                let mut rec = [0.0; 6];
                for (c, l) in corners.iter().zip(&lam) {
                    let e = c_entries(c);
                    for r in 0..6 {
                        rec[r] += l * e[r];
                    }
                }
                for r in 0..6 {
                    assert!((rec[r] - direct[r]).abs() <= 1e-12);
                }
            }
            let lam = cell.corner_weights(&corners[corners.len() - 1]);
            assert_eq!(lam.iter().filter(|&&l| l == 1.0).count(), 1);
        }
    }

    #[test]
    fn flat_coordinate_halves_corners() {
        let cell = SdpCell {
            idx: [0, 0, 0],
            sub: 0,
            parts: 1,
            bbox: Cell { lo: [0.1, 0.2, 0.3, 0.05], hi: [0.2, 0.3, 0.4, 0.05] },
        };
        assert_eq!(cell.corners().len(), 8);
        assert_eq!(cell.corner_weights(&[0.15, 0.25, 0.35, 0.05]).len(), 8);
    }

    #[test]
    fn head_tail_hand_trace() {
        let d = default_breakpoints();
        let i = d.interval_of(0.25);
        let (q, f) = census_matrices(&d, &[([0.25, 0.25, 0.25, 0.1], 1.0)]);
        assert!((q[(i, i)] - 6.0 * (0.1 - 0.0625)).abs() < 1e-15);
        assert_eq!(f[(i, i)], 6.0);
        let (q, f) = census_matrices(&d, &[([1.0; 4], 1.0)]);
        assert_eq!(q.max_abs_diff(&Matrix::zeros(28)), 0.0);
        assert_eq!(f[(27, 27)], 6.0);
    }

    #[test]
    fn census_matches_definitions() {
        let d = default_breakpoints();
        for seed in 1..=3 {
            let inst = generate_random(7, 0.5, seed).unwrap();
            let (sol, _) = solve_cluster_lp_exact(&inst, 20).unwrap();
            let census = triangle_census(&sol);
            assert_eq!(census.len(), 7 * 6 * 8 / 6 + 1);
            let (cq, cf) = census_matrices(&d, &census);
            let (eq, ef) = empirical_matrices(&d, &sol);
            assert!(cq.max_abs_diff(&eq) <= 1e-9);
            assert!(cf.max_abs_diff(&ef) <= 1e-9);
            assert!(eq.min_eigenvalue() >= -1e-7);
        }
    }

    fn small_model() -> SdpModel {
        let disc =
            Discretization::new(vec![0.0, 0.3, 0.6, 1.0], vec![RefineRule { lo: 0.3, hi: 1.0, parts: 2 }]).unwrap();
        assemble_matrices(&disc, &RuleSet::alg4(), &BudgetSpec::new(DEFAULT_ALPHA).unwrap()).unwrap()
    }

    #[test]
    fn coalescing_keeps_largest_d_tilde() {
        let m = small_model();
        assert!(m.coalesced > 0);
        for var in &m.vars {
            for c in &m.cells {
                if c.cell.corners().iter().any(|p| point_key(p) == point_key(&var.corner)) {
                    assert!(var.d_tilde >= c.d_tilde);
                }
            }
        }
    }

    #[test]
    fn eta_evaluation() {
        let m = small_model();
        let k = m.vars.len();
        let uniform = vec![1.0 / k as f64; k];
        let ev = evaluate_eta(&m, &uniform).unwrap();
        assert!((ev.sum - 1.0).abs() < 1e-12);
        assert!(m.q_of(&uniform).asymmetry() <= 1e-12);
        let mut bad = uniform.clone();
        bad[0] = -0.1;
        assert!(evaluate_eta(&m, &bad).is_err());
        assert!(evaluate_eta(&m, &uniform[1..]).is_err());

        let top = m.vars.iter().position(|v| v.corner == [1.0; 4]).unwrap();
        let mut unit = vec![0.0; k];
        unit[top] = 1.0;
        let ev = evaluate_eta(&m, &unit).unwrap();
        assert_eq!(m.q_of(&unit).max_abs_diff(&Matrix::zeros(3)), 0.0);
        assert_eq!(m.f_of(&unit)[(2, 2)], 6.0);
        assert!(ev.min_eig_f >= 0.0);
    }

    #[test]
    fn coefficient_lists_match_dense_assembly() {
        let m = small_model();
        for v in 0..m.vars.len() {
            let mut unit = vec![0.0; m.vars.len()];
            unit[v] = 1.0;
            let (q, f) = (m.q_of(&unit), m.f_of(&unit));
            for (i, j, x) in m.q_coefficients(v) {
                assert!((q[(i, j)] - x).abs() < 1e-15 && q[(i, j)] == q[(j, i)]);
            }
            for (i, j, x) in m.f_coefficients(v) {
                assert!((f[(i, j)] - x).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn census_maps_to_normalized_eta() {
        let m = small_model();
        let inst = generate_random(6, 0.5, 9).unwrap();
        let (sol, _) = solve_cluster_lp_exact(&inst, 20).unwrap();
        let eta = m.census_to_eta(&triangle_census(&sol)).unwrap();
        let ev = evaluate_eta(&m, &eta).unwrap();
        assert!((ev.sum - 1.0).abs() < 1e-12);
        assert!(ev.objective.is_finite());
    }
}
