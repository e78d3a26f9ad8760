//! The cluster LP over all nonempty subsets, and statistics derived from its solution.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::simplex::{self, LpProblem};
use crate::instance::{objective_fractional, pairs, FractionalAssignment, Instance};
use crate::linalg::Matrix;
use crate::set::VertexSet;
use crate::{Error, Result, API_TOL};

pub const DEFAULT_MAX_N: usize = 12;
/// Support entries with `z_S` at or below this are dropped.
pub const SUPPORT_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZEntry {
    pub set: VertexSet,
    pub z: f64,
}

/// Sparse cluster-LP solution with cached pair co-clustering values `y_uv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolutionRepr", into = "SolutionRepr")]
pub struct ClusterLpSolution {
    n: usize,
    z: Vec<ZEntry>,
    lp_value: f64,
    y: Matrix,
}

#[derive(Serialize, Deserialize)]
struct SolutionRepr {
    n: usize,
    lp_value: f64,
    z: Vec<ZEntry>,
}

impl TryFrom<SolutionRepr> for ClusterLpSolution {
    type Error = Error;

    fn try_from(r: SolutionRepr) -> Result<Self> {
        let sol = ClusterLpSolution::from_support(r.n, r.z.into_iter().map(|e| (e.set, e.z)))?;
        Ok(ClusterLpSolution { lp_value: r.lp_value, ..sol })
    }
}

impl From<ClusterLpSolution> for SolutionRepr {
    fn from(s: ClusterLpSolution) -> Self {
        SolutionRepr { n: s.n, lp_value: s.lp_value, z: s.z }
    }
}

/// The eight quantities of a triple `(u, v, w)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleStats {
    pub y_uv: f64,
    pub y_uw: f64,
    pub y_vw: f64,
    pub y_uvw: f64,
    pub y_uv_w: f64,
    pub y_uw_v: f64,
    pub y_vw_u: f64,
    pub y_u_v_w: f64,
}

impl ClusterLpSolution {
    /// Builds a solution from its support and checks coverage `Σ_{S∋u} z_S = 1` within [`API_TOL`].
    /// The value is 0 until [`Self::with_value_for`] attaches an instance.
    pub fn from_support(n: usize, support: impl IntoIterator<Item = (VertexSet, f64)>) -> Result<Self> {
        let mut z: Vec<ZEntry> = Vec::new();
        for (set, val) in support {
            if !val.is_finite() || val < -API_TOL {
                return Err(Error::validation(format!("z = {val} is negative or not finite")));
            }
            if set.is_empty() {
                return Err(Error::validation("z entry on the empty set"));
            }
            if set.iter().any(|v| v >= n) {
                return Err(Error::validation(format!("z entry {set:?} has a vertex outside 0..{n}")));
            }
            if val > SUPPORT_EPS {
                z.push(ZEntry { set, z: val });
            }
        }
        z.sort_by(|a, b| a.set.cmp(&b.set));
        for w in z.windows(2) {
            if w[0].set == w[1].set {
                return Err(Error::validation(format!("set {:?} listed twice", w[0].set)));
            }
        }
        let mut y = Matrix::zeros(n);
        for e in &z {
            let members = e.set.to_vec();
            for &u in &members {
                for &v in &members {
                    y[(u, v)] += e.z;
                }
            }
        }
        for u in 0..n {
            if libm::fabs(y[(u, u)] - 1.0) > API_TOL {
                return Err(Error::validation(format!("vertex {u} has coverage {} instead of 1", y[(u, u)])));
            }
        }
        Ok(ClusterLpSolution { n, z, lp_value: 0.0, y })
    }

    /// Integral solution of a clustering.
    pub fn from_clustering(c: &crate::Clustering) -> Self {
        let n = c.num_vertices();
        Self::from_support(n, c.clusters().iter().map(|cl| (VertexSet::from_members(n, cl.iter().copied()), 1.0)))
            .expect("a partition covers every vertex once")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[ZEntry] {
        &self.z
    }

    pub fn lp_value(&self) -> f64 {
        self.lp_value
    }

    /// Recomputes the value as `obj(x)` for `inst`.
    pub fn with_value_for(mut self, inst: &Instance) -> Result<Self> {
        self.lp_value = objective_fractional(inst, &self.x())?;
        Ok(self)
    }

    /// `y_uv = Σ_{S ⊇ {u,v}} z_S`; `y_uu = 1`.
    pub fn y_pair(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 1.0;
        }
        self.y[(u, v)].clamp(0.0, 1.0)
    }

    pub fn y_triple(&self, u: usize, v: usize, w: usize) -> f64 {
        self.z
            .iter()
            .filter(|e| e.set.contains(u) && e.set.contains(v) && e.set.contains(w))
            .map(|e| e.z)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// `x_uv = 1 − y_uv`.
    pub fn x(&self) -> FractionalAssignment {
        FractionalAssignment::from_fn(self.n, |u, v| 1.0 - self.y_pair(u, v)).expect("y clamped to [0, 1]")
    }

    pub fn x_pair(&self, u: usize, v: usize) -> f64 {
        1.0 - self.y_pair(u, v)
    }

    pub fn derive_triple_stats(&self, u: usize, v: usize, w: usize) -> TripleStats {
        let y_uv = self.y_pair(u, v);
        let y_uw = self.y_pair(u, w);
        let y_vw = self.y_pair(v, w);
        let y_uvw = self.y_triple(u, v, w);
        let y_uv_w = y_uv - y_uvw;
        let y_uw_v = y_uw - y_uvw;
        let y_vw_u = y_vw - y_uvw;
        TripleStats { y_uv, y_uw, y_vw, y_uvw, y_uv_w, y_uw_v, y_vw_u, y_u_v_w: 1.0 - y_uv_w - y_uw_v - y_vw_u - y_uvw }
    }

    /// `max_u |Σ_{S∋u} z_S − 1|`.
    pub fn max_coverage_violation(&self) -> f64 {
        (0..self.n).map(|u| libm::fabs(self.y[(u, u)] - 1.0)).fold(0.0, f64::max)
    }

    /// `COV_u(v, w) = y_uvw − y_uv·y_uw` over `v, w ≠ u` (diagonal `y_uv − y_uv²`).
    pub fn covariance_matrix(&self, u: usize) -> Matrix {
        let others: Vec<usize> = (0..self.n).filter(|&v| v != u).collect();
        let y_u: Vec<f64> = others.iter().map(|&v| self.y_pair(u, v)).collect();
        let joint =
            Matrix::from_fn(others.len(), |a, b| if a == b { y_u[a] } else { self.y_triple(u, others[a], others[b]) });
        covariance_from_tables(&y_u, &joint)
    }

    pub fn check_covariance_psd(&self, u: usize) -> f64 {
        self.covariance_matrix(u).min_eigenvalue()
    }

    /// Minimum eigenvalue of `(1 − x_uv)_{u,v}` (equal to `y`, unit diagonal).
    pub fn check_gram_psd(&self) -> f64 {
        Matrix::from_fn(self.n, |u, v| self.y_pair(u, v)).min_eigenvalue()
    }
}

/// `M[a][b] = joint[a][b] − y[a]·y[b]` for a table of pair values and joint values.
pub fn covariance_from_tables(y: &[f64], joint: &Matrix) -> Matrix {
    Matrix::from_fn(y.len(), |a, b| joint[(a, b)] - y[a] * y[b])
}

/// Column cost `|E⁻(S)| − |E⁺(S)|` for every nonempty mask; index 0 unused.
fn subset_costs(inst: &Instance) -> Vec<f64> {
    let n = inst.n();
    let adj: Vec<u64> = (0..n).map(|u| inst.plus_neighbors(u).iter().fold(0u64, |m, v| m | (1 << v))).collect();
    let mut cost = vec![0i64; 1 << n];
    for mask in 1usize..(1 << n) {
        let v = mask.trailing_zeros() as usize;
        let rest = (mask & (mask - 1)) as u64;
        let plus = (adj[v] & rest).count_ones() as i64;
        let minus = rest.count_ones() as i64 - plus;
        cost[mask] = cost[mask & (mask - 1)] + minus - plus;
    }
    cost.into_iter().map(|c| c as f64).collect()
}

/// Solves the cluster LP exactly with one column per nonempty subset.
pub fn solve_cluster_lp_exact(inst: &Instance, max_n: usize) -> Result<(ClusterLpSolution, simplex::LpSolverReport)> {
    let n = inst.n();
    if n > max_n || n > 20 {
        return Err(Error::Capacity {
            what: "cluster LP".into(),
            n,
            max_n: max_n.min(20),
            cost: format!("2^{n} - 1 columns"),
        });
    }
    if n == 0 {
        return Err(Error::validation("cluster LP on an empty instance"));
    }
    let cols = (1usize << n) - 1;
    let costs = subset_costs(inst);
    let mut p = LpProblem::new(n, cols);
    for mask in 1..=cols {
        let j = mask - 1;
        p.c[j] = costs[mask];
        for u in 0..n {
            if mask & (1 << u) != 0 {
                p.set(u, j, 1.0);
            }
        }
    }
    p.b = vec![1.0; n];
    let report = simplex::solve(&p)?;
    let support = report
        .x
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > SUPPORT_EPS)
        .map(|(j, &v)| (VertexSet::from_mask(n, (j + 1) as u64), v));
    let mut sol = ClusterLpSolution::from_support(n, support)?;
    sol.lp_value = inst.num_plus() as f64 + report.objective;
    Ok((sol, report))
}

/// Largest violation of `3y_uvw ≤ y_uv + y_uw + y_vw ≤ 3/2 + (3/2)y_uvw` over all triples.
pub fn weaker_lem_violation(sol: &ClusterLpSolution) -> f64 {
    let n = sol.n();
    let mut worst: f64 = 0.0;
    for u in 0..n {
        for v in u + 1..n {
            for w in v + 1..n {
                let t = sol.derive_triple_stats(u, v, w);
                let s = t.y_uv + t.y_uw + t.y_vw;
                worst = worst.max(3.0 * t.y_uvw - s).max(s - 1.5 - 1.5 * t.y_uvw);
            }
        }
    }
    worst
}

/// `Σ_{E⁺} x_uv + Σ_{E⁻}(1 − x_uv)` for a solution, recomputed from pairs.
pub fn pair_objective(inst: &Instance, sol: &ClusterLpSolution) -> f64 {
    pairs(inst.n()).map(|(u, v)| if inst.is_plus(u, v) { sol.x_pair(u, v) } else { sol.y_pair(u, v) }).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_exact;
    use crate::instance::generate_random;
    use crate::Clustering;
    use proptest::prelude::*;

    fn set(n: usize, m: &[usize]) -> VertexSet {
        VertexSet::from_members(n, m.iter().copied())
    }

    #[test]
    fn subset_costs_match_direct_count() {
        let inst = generate_random(6, 0.5, 3).unwrap();
        let costs = subset_costs(&inst);
        for mask in 1usize..64 {
            let members: Vec<usize> = (0..6).filter(|&v| mask & (1 << v) != 0).collect();
            let mut c = 0i64;
            for (i, &u) in members.iter().enumerate() {
                for &v in &members[i + 1..] {
                    c += if inst.is_plus(u, v) { -1 } else { 1 };
                }
            }
            assert_eq!(costs[mask], c as f64);
        }
    }

    #[test]
    fn single_plus_edge() {
        let inst = Instance::new(2, [(0, 1)]).unwrap();
        let (sol, _) = solve_cluster_lp_exact(&inst, 12).unwrap();
        assert_eq!(sol.support().len(), 1);
        assert_eq!(sol.support()[0].set, set(2, &[0, 1]));
        assert!((sol.support()[0].z - 1.0).abs() < 1e-9);
        assert!(sol.lp_value().abs() < 1e-9);
    }

    #[test]
    fn bad_triangle_value_at_most_opt() {
        let inst = Instance::new(3, [(0, 1), (1, 2)]).unwrap();
        let (sol, report) = solve_cluster_lp_exact(&inst, 12).unwrap();
        assert!(sol.lp_value() >= -1e-9 && sol.lp_value() <= 1.0 + 1e-9);
        assert!((report.objective - report.dual_objective).abs() < 1e-9);
        assert!((pair_objective(&inst, &sol) - sol.lp_value()).abs() < 1e-9);
    }

    #[test]
    fn triple_stats_examples() {
        let s = ClusterLpSolution::from_support(3, [(set(3, &[0, 1, 2]), 1.0)]).unwrap();
        let t = s.derive_triple_stats(0, 1, 2);
        assert_eq!(
            [t.y_uv, t.y_uw, t.y_vw, t.y_uvw, t.y_uv_w, t.y_uw_v, t.y_vw_u, t.y_u_v_w],
            [1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]
        );
        let s = ClusterLpSolution::from_support(3, [(set(3, &[0, 1]), 1.0), (set(3, &[2]), 1.0)]).unwrap();
        let t = s.derive_triple_stats(0, 1, 2);
        assert_eq!((t.y_uv, t.y_uvw, t.y_uv_w, t.y_u_v_w), (1.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn coverage_is_validated() {
        assert!(ClusterLpSolution::from_support(2, [(set(2, &[0]), 1.0)]).is_err());
        assert!(ClusterLpSolution::from_support(2, [(set(2, &[0, 1]), 0.5)]).is_err());
    }

    #[test]
    fn integral_solution_has_zero_covariance() {
        let c = Clustering::new(5, vec![vec![0, 3], vec![1, 2, 4]]).unwrap();
        let s = ClusterLpSolution::from_clustering(&c);
        for u in 0..5 {
            let m = s.covariance_matrix(u);
            assert!(m.max_abs_diff(&Matrix::zeros(4)) < 1e-15);
        }
        assert!(s.check_gram_psd() > -1e-12);
    }

    #[test]
    fn hand_built_table_is_not_psd() {
        let y = vec![0.5; 4];
        let joint = Matrix::from_fn(4, |a, b| if a == b { 0.5 } else { 0.0 });
        let m = covariance_from_tables(&y, &joint);
        assert_eq!(m[(0, 1)], -0.25);
        assert!(m.min_eigenvalue() < -0.4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn solved_instances_satisfy_structure(n in 2usize..9, p in 0.0f64..1.0, seed in any::<u64>()) {
            let inst = generate_random(n, p, seed).unwrap();
            let (sol, report) = solve_cluster_lp_exact(&inst, 12).unwrap();
            let opt = solve_exact(&inst, 12).unwrap().opt_value as f64;
            prop_assert!(sol.lp_value() <= opt + 1e-6);
            prop_assert!(report.max_violation <= 1e-7);
            prop_assert!((report.objective - report.dual_objective).abs() <= 1e-7);
            prop_assert!(sol.max_coverage_violation() <= 1e-7);
            prop_assert!(weaker_lem_violation(&sol) <= 1e-7);
            prop_assert!(sol.check_gram_psd() >= -1e-7);
            for u in 0..n {
                prop_assert!(sol.check_covariance_psd(u) >= -1e-7);
            }
            prop_assert!((pair_objective(&inst, &sol) - sol.lp_value()).abs() <= 1e-7);
        }
    }
}
