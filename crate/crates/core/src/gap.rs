//! Line graph of `K_n`: a family whose star clusterings cost 4/3 of a half-integral LP solution.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::exact::{self, solve_exact};
use crate::instance::{pair_index, pairs};
use crate::lp::{solve_cluster_lp_exact, ClusterLpSolution};
use crate::set::VertexSet;
use crate::{Clustering, Error, Instance, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LineGraphInstance {
    pub base_n: usize,
    pub instance: Instance,
    /// Base edge `(a, b)`, `a < b`, of each vertex.
    pub base_edges: Vec<(usize, usize)>,
}

impl LineGraphInstance {
    /// Vertex of base edge `{a, b}`.
    pub fn vertex_of(&self, a: usize, b: usize) -> usize {
        pair_index(self.base_n, a, b)
    }

    /// Vertices whose base edge contains `v`.
    pub fn star(&self, v: usize) -> Vec<usize> {
        (0..self.base_n).filter(|&u| u != v).map(|u| self.vertex_of(u, v)).collect()
    }
}

pub fn build_line_graph_instance(n: usize) -> Result<LineGraphInstance> {
    if n < 3 {
        return Err(Error::validation(format!("line graph needs n >= 3, got {n}")));
    }
    let base_edges: Vec<(usize, usize)> = pairs(n).collect();
    let instance = Instance::from_fn(base_edges.len(), |e, f| {
        let (a, b) = base_edges[e];
        let (c, d) = base_edges[f];
        a == c || a == d || b == c || b == d
    });
    Ok(LineGraphInstance { base_n: n, instance, base_edges })
}

/// `z = 1/2` on each of the `n` stars.
pub fn fractional_star_solution(lgi: &LineGraphInstance) -> Result<ClusterLpSolution> {
    let m = lgi.base_edges.len();
    let support = (0..lgi.base_n).map(|v| (VertexSet::from_members(m, lgi.star(v)), 0.5));
    ClusterLpSolution::from_support(m, support)?.with_value_for(&lgi.instance)
}

/// Greedy residual stars: cluster `i` takes the untaken base edges at `order[i]`.
pub fn star_clustering(lgi: &LineGraphInstance, order: &[usize]) -> Result<Clustering> {
    let n = lgi.base_n;
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || core::mem::replace(&mut seen[v], true)) {
        return Err(Error::validation(format!("order {order:?} is not a permutation of 0..{n}")));
    }
    let mut taken = vec![false; lgi.base_edges.len()];
    let mut clusters = Vec::new();
    for &v in order {
        let c: Vec<usize> = lgi.star(v).into_iter().filter(|&e| !core::mem::replace(&mut taken[e], true)).collect();
        if !c.is_empty() {
            clusters.push(c);
        }
    }
    Clustering::new(lgi.base_edges.len(), clusters)
}

/// `|E⁺| = C(n,2)·(2n − 4)/2`.
pub fn plus_edge_count(n: u64) -> u64 {
    n * (n - 1) / 2 * (n - 2)
}

/// Value of the star solution: every +edge has `x = 1/2`, every −edge `x = 1`.
pub fn fractional_value(n: u64) -> Ratio<u64> {
    Ratio::new(plus_edge_count(n), 2)
}

/// Cost of any star clustering: `|E⁺|` minus the +edges inside clusters of sizes `n−1, …, 1`.
pub fn star_cost(n: u64) -> u64 {
    let inside: u64 = (1..n).map(|c| c * (c - 1) / 2).sum();
    plus_edge_count(n) - inside
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    pub vertices: usize,
    pub plus_edges: u64,
    /// Exact, as `p/q`.
    pub fractional_value: String,
    pub star_cost: u64,
    /// `star_cost / fractional_value`, exact.
    pub ratio: String,
    pub ratio_is_four_thirds: bool,
    pub opt: Option<u64>,
    pub lp_value: Option<f64>,
    pub opt_over_lp: Option<f64>,
}

fn ratio_text(r: Ratio<u64>) -> String {
    format!("{r}")
}

/// One row per `n`; the oracle and the exact LP run when the line graph has at most `max_exact_vertices` vertices.
pub fn gap_report(n_list: &[usize], max_exact_vertices: usize) -> Result<Vec<GapRow>> {
    let mut rows = Vec::new();
    for &n in n_list {
        if n < 3 {
            return Err(Error::validation(format!("line graph needs n >= 3, got {n}")));
        }
        let nn = n as u64;
        let frac = fractional_value(nn);
        let cost = star_cost(nn);
        let ratio = Ratio::from_integer(cost) / frac;
        let vertices = n * (n - 1) / 2;
        let (opt, lp_value) = if vertices <= max_exact_vertices.min(exact::DEFAULT_MAX_N) {
            let lgi = build_line_graph_instance(n)?;
            let opt = solve_exact(&lgi.instance, exact::DEFAULT_MAX_N)?.opt_value;
            let (sol, _) = solve_cluster_lp_exact(&lgi.instance, max_exact_vertices)?;
            (Some(opt), Some(sol.lp_value()))
        } else {
            (None, None)
        };
        rows.push(GapRow {
            n,
            vertices,
            plus_edges: plus_edge_count(nn),
            fractional_value: ratio_text(frac),
            star_cost: cost,
            ratio: ratio_text(ratio),
            ratio_is_four_thirds: ratio == Ratio::new(4, 3),
            opt,
            lp_value,
            // undefined when the LP value is 0 (n = 3: a single +triangle)
            opt_over_lp: opt.zip(lp_value).filter(|&(_, l)| l > 1e-9).map(|(o, l)| o as f64 / l),
        });
    }
    Ok(rows)
}

/// Whether every member of every cluster has at least `(|C| − 1)/2` +neighbors inside its cluster.
pub fn cluster_size_bound_check(lgi: &LineGraphInstance, c: &Clustering) -> bool {
    c.clusters().iter().all(|members| {
        members.iter().all(|&u| {
            let inside = members.iter().filter(|&&v| v != u && lgi.instance.is_plus(u, v)).count();
            2 * inside + 1 >= members.len()
        })
    })
}
