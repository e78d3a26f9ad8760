//! Complete signed graphs, clusterings and their objectives.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::set::VertexSet;
use crate::{rng_from_seed, Error, Result};

/// Index of the unordered pair `{u, v}` (u != v) in row-major upper-triangle order.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// All unordered pairs `(u, v)` with `u < v`, in [`pair_index`] order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
}

/// A complete signed graph on vertices `0..n`. Pairs not in `plus_edges` are −edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    n: usize,
    plus_edges: Vec<(usize, usize)>,
    adj: Vec<VertexSet>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    n: usize,
    plus_edges: Vec<[usize; 2]>,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = Error;

    fn try_from(repr: InstanceRepr) -> Result<Self> {
        Instance::new(repr.n, repr.plus_edges.into_iter().map(|[u, v]| (u, v)))
    }
}

impl From<Instance> for InstanceRepr {
    fn from(inst: Instance) -> Self {
        InstanceRepr { n: inst.n, plus_edges: inst.plus_edges.iter().map(|&(u, v)| [u, v]).collect() }
    }
}

impl Instance {
    /// Builds an instance; rejects self-loops, out-of-range endpoints and duplicate pairs.
    pub fn new(n: usize, plus_edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, (u, v)) in plus_edges.into_iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "plus_edges[{i}] = [{u}, {v}]: endpoint out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("plus_edges[{i}] = [{u}, {v}]: self-loop")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::validation(format!("plus_edges[{i}] = [{u}, {v}]: duplicate pair")));
            }
        }
        Ok(Self::from_canonical(n, seen.into_iter().collect()))
    }

    fn from_canonical(n: usize, plus_edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![VertexSet::new(n); n];
        for &(u, v) in &plus_edges {
            adj[u].insert(v);
            adj[v].insert(u);
        }
        Instance { n, plus_edges, adj }
    }

    /// Builds an instance from a sign predicate evaluated on every pair `u < v`.
    pub fn from_fn(n: usize, mut is_plus: impl FnMut(usize, usize) -> bool) -> Self {
        let edges = pairs(n).filter(|&(u, v)| is_plus(u, v)).collect();
        Self::from_canonical(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Canonical `(u, v)` with `u < v`, sorted.
    pub fn plus_edges(&self) -> &[(usize, usize)] {
        &self.plus_edges
    }

    #[inline]
    pub fn is_plus(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    /// +neighbors of `u`, not including `u` itself.
    pub fn plus_neighbors(&self, u: usize) -> &VertexSet {
        &self.adj[u]
    }

    pub fn plus_degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn num_pairs(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn num_plus(&self) -> usize {
        self.plus_edges.len()
    }

    pub fn num_minus(&self) -> usize {
        self.num_pairs() - self.num_plus()
    }

    /// The instance induced on `keep` (relabelled `0..keep.len()` in order).
    pub fn induced(&self, keep: &[usize]) -> Instance {
        Instance::from_fn(keep.len(), |a, b| self.is_plus(keep[a], keep[b]))
    }
}

/// A partition of `0..n` into non-empty clusters, stored in canonical order:
/// members ascending, clusters ordered by smallest member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ClusteringRepr", into = "ClusteringRepr")]
pub struct Clustering {
    clusters: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct ClusteringRepr {
    clusters: Vec<Vec<usize>>,
}

impl TryFrom<ClusteringRepr> for Clustering {
    type Error = Error;

    fn try_from(repr: ClusteringRepr) -> Result<Self> {
        let n = repr.clusters.iter().map(Vec::len).sum();
        Clustering::new(n, repr.clusters)
    }
}

impl From<Clustering> for ClusteringRepr {
    fn from(c: Clustering) -> Self {
        ClusteringRepr { clusters: c.clusters }
    }
}

impl Clustering {
    /// Validates that `clusters` partition `0..n` into non-empty disjoint sets.
    pub fn new(n: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(clusters.len());
        for (ci, mut c) in clusters.into_iter().enumerate() {
            if c.is_empty() {
                return Err(Error::validation(format!("cluster {ci} is empty")));
            }
            for &v in &c {
                if v >= n {
                    return Err(Error::validation(format!("cluster {ci}: vertex {v} out of range for n = {n}")));
                }
                if seen[v] {
                    return Err(Error::validation(format!("vertex {v} appears in more than one cluster")));
                }
                seen[v] = true;
            }
            c.sort_unstable();
            out.push(c);
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::validation(format!("vertex {v} is not covered by any cluster")));
        }
        out.sort_unstable_by_key(|c| c[0]);
        Ok(Clustering { clusters: out })
    }

    /// Clustering from per-vertex labels; equal labels share a cluster.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut by_label: alloc::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (v, &l) in labels.iter().enumerate() {
            by_label.entry(l).or_default().push(v);
        }
        let mut clusters: Vec<Vec<usize>> = by_label.into_values().collect();
        clusters.sort_unstable_by_key(|c| c[0]);
        Clustering { clusters }
    }

    pub fn singletons(n: usize) -> Self {
        Clustering { clusters: (0..n).map(|v| vec![v]).collect() }
    }

    pub fn one_cluster(n: usize) -> Self {
        if n == 0 {
            return Clustering { clusters: Vec::new() };
        }
        Clustering { clusters: vec![(0..n).collect()] }
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn num_vertices(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// Cluster index of every vertex.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.num_vertices()];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in c {
                labels[v] = i;
            }
        }
        labels
    }

    fn check_size(&self, n: usize) -> Result<()> {
        let size = self.num_vertices();
        if size != n {
            return Err(Error::validation(format!("clustering covers {size} vertices, instance has {n}")));
        }
        Ok(())
    }
}

/// Symmetric separation values `x_uv ∈ [0, 1]` over unordered pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalAssignment {
    n: usize,
    values: Vec<Option<f64>>,
}

impl FractionalAssignment {
    /// An assignment with every pair undefined.
    pub fn new(n: usize) -> Self {
        FractionalAssignment { n, values: vec![None; n * n.saturating_sub(1) / 2] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut x = Self::new(n);
        for (u, v) in pairs(n) {
            x.set(u, v, f(u, v))?;
        }
        Ok(x)
    }

    /// The 0/1 separation indicator of a clustering.
    pub fn indicator(c: &Clustering) -> Self {
        let labels = c.labels();
        let n = labels.len();
        Self::from_fn(n, |u, v| if labels[u] == labels[v] { 0.0 } else { 1.0 }).expect("indicator values are 0 or 1")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, u: usize, v: usize, value: f64) -> Result<()> {
        if u == v || u >= self.n || v >= self.n {
            return Err(Error::validation(format!("pair ({u}, {v}) invalid for n = {}", self.n)));
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::validation(format!("x[{u},{v}] = {value} outside [0, 1]")));
        }
        self.values[pair_index(self.n, u, v)] = Some(value);
        Ok(())
    }

    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        if u == v {
            return Some(0.0);
        }
        self.values[pair_index(self.n, u, v)]
    }
}

/// Number of +edges cut plus number of −edges kept inside a cluster.
pub fn objective_clustering(inst: &Instance, c: &Clustering) -> Result<u64> {
    c.check_size(inst.n())?;
    let labels = c.labels();
    let mut cost = 0u64;
    for (u, v) in pairs(inst.n()) {
        let same = labels[u] == labels[v];
        if inst.is_plus(u, v) != same {
            cost += 1;
        }
    }
    Ok(cost)
}

/// `Σ_{E⁺} x_uv + Σ_{E⁻} (1 − x_uv)`.
pub fn objective_fractional(inst: &Instance, x: &FractionalAssignment) -> Result<f64> {
    if x.n() != inst.n() {
        return Err(Error::validation(format!("assignment has n = {}, instance has n = {}", x.n(), inst.n())));
    }
    let mut total = 0.0;
    for (u, v) in pairs(inst.n()) {
        let xv = x.get(u, v).ok_or_else(|| Error::validation(format!("x[{u},{v}] is not defined")))?;
        total += if inst.is_plus(u, v) { xv } else { 1.0 - xv };
    }
    Ok(total)
}

/// Erdős–Rényi style instance: each pair is a +edge with probability `plus_prob`.
pub fn generate_random(n: usize, plus_prob: f64, seed: u64) -> Result<Instance> {
    if !(0.0..=1.0).contains(&plus_prob) {
        return Err(Error::validation(format!("plus_prob = {plus_prob} outside [0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    Ok(Instance::from_fn(n, |_, _| rng.random_bool(plus_prob)))
}

/// Planted partition into `k` groups; each pair's sign is flipped with probability `noise`.
pub fn generate_planted(n: usize, k: usize, noise: f64, seed: u64) -> Result<Instance> {
    if k == 0 {
        return Err(Error::validation("planted instance needs k >= 1"));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::validation(format!("noise = {noise} outside [0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    Ok(Instance::from_fn(n, |u, v| (labels[u] == labels[v]) != rng.random_bool(noise)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> Instance {
        Instance::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn clustering_objective_examples() {
        let inst = Instance::new(2, [(0, 1)]).unwrap();
        assert_eq!(objective_clustering(&inst, &Clustering::one_cluster(2)).unwrap(), 0);
        assert_eq!(objective_clustering(&path3(), &Clustering::one_cluster(3)).unwrap(), 1);
        assert_eq!(objective_clustering(&path3(), &Clustering::singletons(3)).unwrap(), 2);
    }

    #[test]
    fn path3_minimum_over_all_partitions_is_one() {
        let partitions: [&[&[usize]]; 5] =
            [&[&[0, 1, 2]], &[&[0], &[1, 2]], &[&[0, 1], &[2]], &[&[0, 2], &[1]], &[&[0], &[1], &[2]]];
        let best = partitions
            .iter()
            .map(|p| {
                let c = Clustering::new(3, p.iter().map(|c| c.to_vec()).collect()).unwrap();
                objective_clustering(&path3(), &c).unwrap()
            })
            .min()
            .unwrap();
        assert_eq!(best, 1);
    }

    #[test]
    fn invalid_partitions_rejected() {
        assert!(Clustering::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Clustering::new(3, vec![vec![0, 1]]).is_err());
        assert!(Clustering::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        let c = Clustering::one_cluster(4);
        assert!(matches!(objective_clustering(&path3(), &c), Err(Error::Validation(_))));
    }

    #[test]
    fn fractional_objective_examples() {
        let k3 = Instance::new(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let zeros = FractionalAssignment::from_fn(3, |_, _| 0.0).unwrap();
        assert_eq!(objective_fractional(&k3, &zeros).unwrap(), 0.0);

        let empty = Instance::new(3, []).unwrap();
        let ones = FractionalAssignment::from_fn(3, |_, _| 1.0).unwrap();
        assert_eq!(objective_fractional(&empty, &ones).unwrap(), 0.0);

        let inst = Instance::new(3, [(0, 1)]).unwrap();
        let x = FractionalAssignment::from_fn(3, |u, v| if (u, v) == (0, 1) { 0.5 } else { 1.0 }).unwrap();
        assert_eq!(objective_fractional(&inst, &x).unwrap(), 0.5);
    }

    #[test]
    fn fractional_missing_pair_is_error() {
        let inst = path3();
        let mut x = FractionalAssignment::new(3);
        x.set(0, 1, 0.2).unwrap();
        assert!(matches!(objective_fractional(&inst, &x), Err(Error::Validation(_))));
        assert!(x.set(0, 2, 1.5).is_err());
    }

    #[test]
    fn generator_examples() {
        let one = generate_random(1, 0.3, 9).unwrap();
        assert_eq!(one.num_plus(), 0);
        let full = generate_random(4, 1.0, 7).unwrap();
        assert_eq!(full.num_plus(), 6);
        assert_eq!(generate_random(10, 0.5, 1).unwrap(), generate_random(10, 0.5, 1).unwrap());
        assert!(generate_random(5, 1.5, 1).is_err());
        assert!(generate_random(5, -0.1, 1).is_err());
    }

    #[test]
    fn new_rejects_bad_pairs() {
        assert!(Instance::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Instance::new(3, [(0, 0)]).is_err());
        assert!(Instance::new(3, [(0, 3)]).is_err());
    }

    proptest! {
        #[test]
        fn objective_identities(n in 1usize..9, p in 0.0f64..1.0, seed in any::<u64>(), labels_seed in any::<u64>()) {
            let inst = generate_random(n, p, seed).unwrap();
            prop_assert_eq!(inst.num_plus() + inst.num_minus(), n * (n - 1) / 2);
            prop_assert_eq!(objective_clustering(&inst, &Clustering::singletons(n)).unwrap(), inst.num_plus() as u64);
            prop_assert_eq!(objective_clustering(&inst, &Clustering::one_cluster(n)).unwrap(), inst.num_minus() as u64);

            let mut rng = rng_from_seed(labels_seed);
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let c = Clustering::from_labels(&labels);
            let x = FractionalAssignment::indicator(&c);
            prop_assert_eq!(objective_fractional(&inst, &x).unwrap(), objective_clustering(&inst, &c).unwrap() as f64);
        }
    }
}
