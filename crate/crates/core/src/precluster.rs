//! Atoms, averaged weights and admissible edges.
//!
//! Inside this module every vertex carries a +self-loop: `N⁺_u` contains `u`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::exact::{solve_exact, solve_exact_good};
use crate::instance::{Clustering, Instance};
use crate::linalg::Matrix;
use crate::rounding::round_classic_pivot;
use crate::{Error, Result};

pub const DEFAULT_BETA: f64 = 0.1;

pub type PairSet = BTreeSet<(usize, usize)>;

/// `|N⁺_u △ S|` with `u ∈ N⁺_u`, for `S` given as a membership mask.
fn sym_diff(inst: &Instance, u: usize, members: &[usize], in_set: &[bool]) -> usize {
    let nbr = inst.plus_degree(u) + 1;
    let common = members.iter().filter(|&&v| v == u || inst.is_plus(u, v)).count();
    debug_assert!(members.iter().all(|&v| in_set[v]));
    nbr + members.len() - 2 * common
}

/// Marks vertices of each cluster of `start` whose neighborhood differs from it; marked vertices become singletons.
pub fn build_atoms_from(inst: &Instance, start: &Clustering, beta: f64) -> Result<Clustering> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::validation(format!("beta = {beta} outside (0, 1)")));
    }
    if start.num_vertices() != inst.n() {
        return Err(Error::validation("starting clustering does not match the instance"));
    }
    let n = inst.n();
    let mut in_set = vec![false; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for c in start.clusters() {
        for &v in c {
            in_set[v] = true;
        }
        let size = c.len() as f64;
        let marked: Vec<bool> = c.iter().map(|&u| sym_diff(inst, u, c, &in_set) as f64 > beta / 2.0 * size).collect();
        let count = marked.iter().filter(|&&m| m).count() as f64;
        let all_marked = count >= beta * size / 3.0;
        let mut atom = Vec::new();
        for (&u, &m) in c.iter().zip(&marked) {
            if m || all_marked {
                clusters.push(vec![u]);
            } else {
                atom.push(u);
            }
        }
        if !atom.is_empty() {
            clusters.push(atom);
        }
        for &v in c {
            in_set[v] = false;
        }
    }
    Clustering::new(n, clusters)
}

/// Atoms built from a seeded classic pivot clustering.
pub fn build_atoms(inst: &Instance, beta: f64, seed: u64) -> Result<Clustering> {
    build_atoms_from(inst, &round_classic_pivot(inst, seed), beta)
}

/// Vertices `u` of non-singleton atoms `K` with `|N⁺_u △ K| ≥ β|K|`.
pub fn k_dense_violations(inst: &Instance, atoms: &Clustering, beta: f64) -> Vec<usize> {
    let mut in_set = vec![false; inst.n()];
    let mut bad = Vec::new();
    for k in atoms.clusters().iter().filter(|k| k.len() > 1) {
        for &v in k {
            in_set[v] = true;
        }
        for &u in k {
            if sym_diff(inst, u, k, &in_set) as f64 >= beta * k.len() as f64 {
                bad.push(u);
            }
        }
        for &v in k {
            in_set[v] = false;
        }
    }
    bad.sort_unstable();
    bad
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedWeights {
    /// `w_uv`, with `w_uv = 1` inside an atom.
    pub w: Matrix,
    /// `w_u = Σ_v w_uv` (including `w_uu = 1`).
    pub w_total: Vec<f64>,
    /// `k_u = |K_u|`.
    pub atom_size: Vec<usize>,
    /// Atom index of each vertex.
    pub atom_of: Vec<usize>,
}

/// Fraction of +pairs between the atoms of `u` and `v`.
pub fn averaged_weights(inst: &Instance, atoms: &Clustering) -> Result<AveragedWeights> {
    let n = inst.n();
    if atoms.num_vertices() != n {
        return Err(Error::validation("atoms do not match the instance"));
    }
    let atom_of = atoms.labels();
    let ks: Vec<usize> = atoms.clusters().iter().map(Vec::len).collect();
    let m = ks.len();
    let mut plus = vec![vec![0u64; m]; m];
    for &(u, v) in inst.plus_edges() {
        let (a, b) = (atom_of[u], atom_of[v]);
        plus[a][b] += 1;
        if a != b {
            plus[b][a] += 1;
        }
    }
    let w = Matrix::from_fn(n, |u, v| {
        let (a, b) = (atom_of[u], atom_of[v]);
        if a == b {
            1.0
        } else {
            plus[a][b] as f64 / (ks[a] * ks[b]) as f64
        }
    });
    let w_total = (0..n).map(|u| (0..n).map(|v| w[(u, v)]).sum()).collect();
    let atom_size = (0..n).map(|u| ks[atom_of[u]]).collect();
    Ok(AveragedWeights { w, w_total, atom_size, atom_of })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreclusteredInstance {
    pub atoms: Clustering,
    pub eps: f64,
    /// Pairs `u ≤ v` with `ε w_v < w_u < w_v / ε`.
    pub e1: PairSet,
    /// Pairs `u ≤ v` of `E¹` in the same atom or with enough common weight.
    pub e2: PairSet,
    /// Cross-atom pairs `u < v` of `E²`, closed under the all-or-nothing rule per atom pair.
    pub adm: PairSet,
    pub weights: AveragedWeights,
}

impl PreclusteredInstance {
    /// `N_adm(u)`.
    pub fn adm_neighbors(&self, u: usize) -> Vec<usize> {
        self.adm
            .iter()
            .filter_map(|&(a, b)| {
                if a == u {
                    Some(b)
                } else if b == u {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }
}

pub fn build_admissible(inst: &Instance, atoms: &Clustering, eps: f64) -> Result<PreclusteredInstance> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::validation(format!("eps = {eps} outside (0, 1)")));
    }
    let weights = averaged_weights(inst, atoms)?;
    let n = inst.n();
    let w = &weights.w;
    let wt = &weights.w_total;
    let mut n1 = vec![vec![false; n]; n];
    let mut e1 = PairSet::new();
    for u in 0..n {
        for v in u..n {
            if eps * wt[v] < wt[u] && wt[u] < wt[v] / eps {
                n1[u][v] = true;
                n1[v][u] = true;
                e1.insert((u, v));
            }
        }
    }
    let mut e2 = PairSet::new();
    for &(u, v) in &e1 {
        let same = weights.atom_of[u] == weights.atom_of[v];
        let overlap = || -> f64 { (0..n).filter(|&p| n1[u][p] && n1[v][p]).map(|p| w[(u, p)] * w[(v, p)]).sum() };
        if same || overlap() > eps * (wt[u] + wt[v]) {
            e2.insert((u, v));
        }
    }
    let mut adm: PairSet = e2.iter().copied().filter(|&(u, v)| weights.atom_of[u] != weights.atom_of[v]).collect();
    let m = atoms.clusters().len();
    let mut blocked = vec![vec![false; m]; m];
    for u in 0..n {
        for v in u + 1..n {
            let (a, b) = (weights.atom_of[u], weights.atom_of[v]);
            if a != b && !adm.contains(&(u, v)) {
                blocked[a][b] = true;
                blocked[b][a] = true;
            }
        }
    }
    adm.retain(|&(u, v)| !blocked[weights.atom_of[u]][weights.atom_of[v]]);
    Ok(PreclusteredInstance { atoms: atoms.clone(), eps, e1, e2, adm, weights })
}

/// Splits `K_u` off its cluster `C` while `k_u < |C| ≤ k_u + ε₁·|N_adm(u)|`.
pub fn enforce_a1(c: &Clustering, pre: &PreclusteredInstance, eps1: f64) -> Result<Clustering> {
    let n = c.num_vertices();
    let atom_of = &pre.weights.atom_of;
    if atom_of.len() != n {
        return Err(Error::validation("clustering does not match the preclustered instance"));
    }
    let mut labels = c.labels();
    for k in pre.atoms.clusters() {
        if k.iter().any(|&v| labels[v] != labels[k[0]]) {
            return Err(Error::validation(format!("clustering breaks atom {k:?}")));
        }
    }
    let adm_deg: Vec<usize> = pre.atoms.clusters().iter().map(|k| pre.adm_neighbors(k[0]).len()).collect();
    let mut next = labels.iter().copied().max().map_or(0, |l| l + 1);
    loop {
        let mut sizes = vec![0usize; next];
        for &l in &labels {
            sizes[l] += 1;
        }
        let hit = pre.atoms.clusters().iter().enumerate().find(|(a, k)| {
            let size = sizes[labels[k[0]]];
            k.len() < size && size as f64 <= k.len() as f64 + eps1 * adm_deg[*a] as f64
        });
        let Some((_, k)) = hit else { break };
        for &v in k {
            labels[v] = next;
        }
        next += 1;
    }
    Ok(Clustering::from_labels(&labels))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub opt: u64,
    pub good_cost: u64,
    pub good_witness: Clustering,
    /// `good_cost / opt`; 1 when both are 0, absent when only `opt` is 0.
    pub good_over_opt: Option<f64>,
    pub adm_size: usize,
    /// `|E_adm| / max(opt, 1)`.
    pub adm_over_opt: f64,
}

/// Compares the cheapest good clustering with the unrestricted optimum.
pub fn audit_preclustering(inst: &Instance, pre: &PreclusteredInstance, max_n: usize) -> Result<AuditReport> {
    let opt = solve_exact(inst, max_n)?.opt_value;
    let good = solve_exact_good(inst, &pre.atoms, &pre.adm, max_n)?;
    let good_over_opt = match (good.opt_value, opt) {
        (0, 0) => Some(1.0),
        (_, 0) => None,
        (g, o) => Some(g as f64 / o as f64),
    };
    Ok(AuditReport {
        opt,
        good_cost: good.opt_value,
        good_witness: good.witness,
        good_over_opt,
        adm_size: pre.adm.len(),
        adm_over_opt: pre.adm.len() as f64 / opt.max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::is_good_clustering;
    use crate::instance::{generate_planted, generate_random};
    use proptest::prelude::*;

    fn two_cliques(k: usize) -> Instance {
        Instance::from_fn(2 * k, |u, v| (u < k) == (v < k) || (u, v) == (k - 1, k))
    }

    #[test]
    fn atom_examples() {
        let k6 = Instance::from_fn(6, |_, _| true);
        assert_eq!(build_atoms_from(&k6, &Clustering::one_cluster(6), 0.1).unwrap(), Clustering::one_cluster(6));
        assert_eq!(build_atoms(&k6, 0.1, 5).unwrap(), Clustering::one_cluster(6));
        let empty = Instance::new(7, []).unwrap();
        assert_eq!(build_atoms(&empty, 0.1, 5).unwrap(), Clustering::singletons(7));
    }

    #[test]
    fn bridged_small_cliques_dissolve() {
        // each bridge endpoint has |N⁺ △ C| = 1 > 0.4, and one mark already reaches β·8/3
        let inst = two_cliques(8);
        let start = Clustering::new(16, vec![(0..8).collect(), (8..16).collect()]).unwrap();
        assert_eq!(build_atoms_from(&inst, &start, 0.1).unwrap(), Clustering::singletons(16));
    }

    #[test]
    fn bridged_large_cliques_keep_atoms() {
        // |C| = 40: threshold β|C|/2 = 2, so one bridge edge marks nobody
        let inst = two_cliques(40);
        let start = Clustering::new(80, vec![(0..40).collect(), (40..80).collect()]).unwrap();
        let atoms = build_atoms_from(&inst, &start, 0.1).unwrap();
        assert_eq!(atoms, start);
        assert!(k_dense_violations(&inst, &atoms, 0.1).is_empty());
    }

    #[test]
    fn weight_examples() {
        let inst = generate_random(6, 0.5, 2).unwrap();
        let w = averaged_weights(&inst, &Clustering::singletons(6)).unwrap();
        for u in 0..6 {
            for v in 0..6 {
                let expect = if u == v || inst.is_plus(u, v) { 1.0 } else { 0.0 };
                assert_eq!(w.w[(u, v)], expect);
            }
        }
        let inst = Instance::new(3, [(0, 2)]).unwrap();
        let atoms = Clustering::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let w = averaged_weights(&inst, &atoms).unwrap();
        assert_eq!(w.w[(0, 2)], 0.5);
        assert_eq!(w.w[(0, 1)], 1.0);
        let w = averaged_weights(&inst, &Clustering::one_cluster(3)).unwrap();
        assert!((0..3).all(|u| (0..3).all(|v| w.w[(u, v)] == 1.0)));
    }

    #[test]
    fn admissible_examples() {
        let empty = Instance::new(5, []).unwrap();
        let pre = build_admissible(&empty, &Clustering::singletons(5), 0.6).unwrap();
        assert!(pre.weights.w_total.iter().all(|&w| w == 1.0));
        assert_eq!(pre.e1.len(), 15);
        assert!(pre.adm.is_empty());
        // distinct u, v share no positive product w_up·w_vp
        let pre = build_admissible(&empty, &Clustering::singletons(5), 0.3).unwrap();
        assert!(pre.adm.is_empty());

        let k5 = Instance::from_fn(5, |_, _| true);
        let pre = build_admissible(&k5, &Clustering::one_cluster(5), 0.25).unwrap();
        assert!(pre.adm.is_empty());

        assert!(build_admissible(&k5, &Clustering::one_cluster(5), 0.0).is_err());
        assert!(build_admissible(&k5, &Clustering::one_cluster(5), 1.0).is_err());
    }

    #[test]
    fn bridge_admissibility_is_symmetric() {
        let inst = two_cliques(8);
        let atoms = Clustering::new(16, vec![(0..8).collect(), (8..16).collect()]).unwrap();
        let pre = build_admissible(&inst, &atoms, 0.2).unwrap();
        // w between the cliques is 1/64; overlap of a cross pair ≈ 2·(1/64) ≪ 0.2·(w_u + w_v)
        assert!(pre.adm.is_empty());
        // all weights equal, so every pair is in E¹
        assert_eq!(pre.e1.len(), 16 * 17 / 2);
    }

    #[test]
    fn enforce_a1_splits_small_excess() {
        let inst = generate_random(6, 0.9, 3).unwrap();
        let atoms = Clustering::singletons(6);
        let mut pre = build_admissible(&inst, &atoms, 0.25).unwrap();
        pre.adm = crate::instance::pairs(6).collect();
        // |C| = 6 ≤ 1 + ε₁·5 needs ε₁ ≥ 1
        let split = enforce_a1(&Clustering::one_cluster(6), &pre, 1.0).unwrap();
        assert_eq!(split, Clustering::singletons(6));
        let kept = enforce_a1(&Clustering::one_cluster(6), &pre, 0.5).unwrap();
        assert_eq!(kept, Clustering::one_cluster(6));
    }

    #[test]
    fn audit_examples() {
        let k6 = Instance::from_fn(6, |_, _| true);
        let atoms = build_atoms(&k6, 0.1, 1).unwrap();
        let pre = build_admissible(&k6, &atoms, 0.25).unwrap();
        let r = audit_preclustering(&k6, &pre, 12).unwrap();
        assert_eq!((r.opt, r.good_cost, r.adm_size, r.good_over_opt), (0, 0, 0, Some(1.0)));
        assert_eq!(r.good_witness, Clustering::one_cluster(6));

        let empty = Instance::new(6, []).unwrap();
        let pre = build_admissible(&empty, &build_atoms(&empty, 0.1, 1).unwrap(), 0.25).unwrap();
        let r = audit_preclustering(&empty, &pre, 12).unwrap();
        assert_eq!(r.good_witness, Clustering::singletons(6));
        assert_eq!(r.good_over_opt, Some(1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn structural_properties(n in 1usize..30, k in 1usize..5, noise in 0.0f64..0.3, eps in 0.05f64..0.5, seed in any::<u64>()) {
            let inst = generate_planted(n, k, noise, seed).unwrap();
            let atoms = build_atoms(&inst, 0.1, seed).unwrap();
            prop_assert_eq!(&atoms, &build_atoms(&inst, 0.1, seed).unwrap());
            prop_assert!(k_dense_violations(&inst, &atoms, 0.1).is_empty());
            let pre = build_admissible(&inst, &atoms, eps).unwrap();
            prop_assert!(pre.adm.is_subset(&pre.e2));
            prop_assert!(pre.e2.is_subset(&pre.e1));
            for &(u, v) in &pre.adm {
                prop_assert!(u < v);
                prop_assert_ne!(pre.weights.atom_of[u], pre.weights.atom_of[v]);
            }
            let again = averaged_weights(&inst, &atoms).unwrap();
            prop_assert_eq!(&again, &pre.weights);
            prop_assert!(is_good_clustering(&atoms, &atoms, &pre.adm).unwrap());
        }
    }
}
