//! Cluster-based and pivot-based rounding of cluster-LP solutions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::instance::{objective_clustering, Clustering, Instance};
use crate::lp::ClusterLpSolution;
use crate::set::VertexSet;
use crate::{derive_seed, rng_from_seed, Error, Result, Rng};

/// Join probability of a −neighbor as a function of `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinusJoin {
    /// `1 − x`
    Linear,
    /// `1 − x²`
    Quadratic,
}

impl MinusJoin {
    pub fn prob(self, x: f64) -> f64 {
        match self {
            MinusJoin::Linear => 1.0 - x,
            MinusJoin::Quadratic => 1.0 - x * x,
        }
    }
}

/// How a +neighbor at distance `x` from the pivot is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlusClass {
    /// `x ≤ τ₁`: joins deterministically.
    Short,
    /// `τ₁ < x ≤ τ₂`: joins iff it lies in the sampled set.
    Dependent,
    /// `x > τ₂`: joins independently with probability `1 − x`.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub name: String,
    pub tau1: f64,
    pub tau2: f64,
    pub minus: MinusJoin,
}

impl RuleSet {
    pub fn new(name: impl Into<String>, tau1: f64, tau2: f64, minus: MinusJoin) -> Result<Self> {
        if !(0.0 <= tau1 && tau1 <= tau2 && tau2 <= 1.0) {
            return Err(Error::validation(format!("thresholds need 0 <= tau1 <= tau2 <= 1, got {tau1}, {tau2}")));
        }
        Ok(RuleSet { name: name.into(), tau1, tau2, minus })
    }

    /// Threshold 0.4, every long +edge dependent, −edges join with `1 − x`.
    pub fn alg3() -> Self {
        RuleSet { name: "alg3".into(), tau1: 0.4, tau2: 1.0, minus: MinusJoin::Linear }
    }

    /// Thresholds 0.4 / 0.57, −edges join with `1 − x²`.
    pub fn alg4() -> Self {
        RuleSet { name: "alg4".into(), tau1: 0.4, tau2: 0.57, minus: MinusJoin::Quadratic }
    }

    pub fn classify_plus(&self, x: f64) -> PlusClass {
        if x <= self.tau1 {
            PlusClass::Short
        } else if x <= self.tau2 {
            PlusClass::Dependent
        } else {
            PlusClass::Independent
        }
    }
}

/// Per-vertex alias tables over `{S : u ∈ S}` and one over the whole support.
#[derive(Clone, Debug)]
pub struct PivotSampler {
    by_vertex: Vec<(Vec<usize>, WeightedAliasIndex<f64>)>,
    global: WeightedAliasIndex<f64>,
}

impl PivotSampler {
    pub fn new(sol: &ClusterLpSolution) -> Result<Self> {
        let support = sol.support();
        if support.is_empty() {
            return Err(Error::Infeasible("z has empty support".into()));
        }
        let alias = |w: Vec<f64>| {
            WeightedAliasIndex::new(w).map_err(|e| Error::Infeasible(format!("cannot sample from z: {e}")))
        };
        let global = alias(support.iter().map(|e| e.z).collect())?;
        let mut by_vertex = Vec::with_capacity(sol.n());
        for u in 0..sol.n() {
            let idx: Vec<usize> = (0..support.len()).filter(|&i| support[i].set.contains(u)).collect();
            if idx.is_empty() {
                return Err(Error::Infeasible(format!("no set in the support contains vertex {u}")));
            }
            let table = alias(idx.iter().map(|&i| support[i].z).collect())?;
            by_vertex.push((idx, table));
        }
        Ok(PivotSampler { by_vertex, global })
    }

    /// Index into the support of a set drawn with probability `z_S` among sets containing `u`.
    pub fn sample_containing(&self, u: usize, rng: &mut Rng) -> usize {
        let (idx, table) = &self.by_vertex[u];
        idx[table.sample(rng)]
    }

    /// Index into the support drawn with probability proportional to `z_S`.
    pub fn sample_any(&self, rng: &mut Rng) -> usize {
        self.global.sample(rng)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotStep {
    pub pivot: usize,
    pub sampled: VertexSet,
    pub cluster: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingTrace {
    pub seed: u64,
    pub steps: Vec<PivotStep>,
    pub clustering: Clustering,
}

fn check_sizes(inst: &Instance, sol: &ClusterLpSolution) -> Result<()> {
    if inst.n() != sol.n() {
        return Err(Error::validation(format!("instance has n = {}, solution has n = {}", inst.n(), sol.n())));
    }
    Ok(())
}

/// Uniformly random element of a non-empty set.
fn uniform_member(set: &VertexSet, rng: &mut Rng) -> usize {
    let k = rng.random_range(0..set.len());
    set.iter().nth(k).expect("k < len")
}

/// One pivot step over the remaining vertices; returns the sampled set index and the new cluster.
pub fn pivot_cluster(
    inst: &Instance,
    sol: &ClusterLpSolution,
    sampler: &PivotSampler,
    rules: &RuleSet,
    pivot: usize,
    remaining: &VertexSet,
    rng: &mut Rng,
) -> (usize, Vec<usize>) {
    let s_idx = sampler.sample_containing(pivot, rng);
    let s = &sol.support()[s_idx].set;
    let mut cluster = alloc::vec![pivot];
    for v in remaining.iter() {
        if v == pivot {
            continue;
        }
        let x = sol.x_pair(pivot, v);
        let joins = if inst.is_plus(pivot, v) {
            match rules.classify_plus(x) {
                PlusClass::Short => true,
                PlusClass::Dependent => s.contains(v),
                PlusClass::Independent => rng.random_bool((1.0 - x).clamp(0.0, 1.0)),
            }
        } else {
            rng.random_bool(rules.minus.prob(x).clamp(0.0, 1.0))
        };
        if joins {
            cluster.push(v);
        }
    }
    (s_idx, cluster)
}

pub fn round_pivot_with(
    inst: &Instance,
    sol: &ClusterLpSolution,
    sampler: &PivotSampler,
    rules: &RuleSet,
    rng: &mut Rng,
    mut on_step: impl FnMut(usize, usize, &[usize]),
) -> Clustering {
    let n = inst.n();
    let mut remaining = VertexSet::from_members(n, 0..n);
    let mut labels = alloc::vec![0; n];
    let mut next = 0;
    while !remaining.is_empty() {
        let pivot = uniform_member(&remaining, rng);
        let (s_idx, cluster) = pivot_cluster(inst, sol, sampler, rules, pivot, &remaining, rng);
        on_step(pivot, s_idx, &cluster);
        for &v in &cluster {
            remaining.remove(v);
            labels[v] = next;
        }
        next += 1;
    }
    Clustering::from_labels(&labels)
}

/// Pivot rounding with a full trace.
pub fn round_pivot(inst: &Instance, sol: &ClusterLpSolution, rules: &RuleSet, seed: u64) -> Result<RoundingTrace> {
    check_sizes(inst, sol)?;
    let sampler = PivotSampler::new(sol)?;
    let mut rng = rng_from_seed(seed);
    let mut steps = Vec::new();
    let clustering = round_pivot_with(inst, sol, &sampler, rules, &mut rng, |pivot, s, c| {
        steps.push(PivotStep { pivot, sampled: sol.support()[s].set.clone(), cluster: c.to_vec() });
    });
    Ok(RoundingTrace { seed, steps, clustering })
}

pub fn round_cluster_based_with(sol: &ClusterLpSolution, sampler: &PivotSampler, rng: &mut Rng) -> Clustering {
    let n = sol.n();
    let mut remaining = VertexSet::from_members(n, 0..n);
    let mut labels = alloc::vec![0; n];
    let mut next = 0;
    while !remaining.is_empty() {
        let s = &sol.support()[sampler.sample_any(rng)].set;
        if !s.intersects(&remaining) {
            continue;
        }
        for v in s.iter() {
            if remaining.contains(v) {
                remaining.remove(v);
                labels[v] = next;
            }
        }
        next += 1;
    }
    Clustering::from_labels(&labels)
}

/// Repeatedly draws `S` with probability ∝ `z_S` and cuts out `S ∩ V′`.
pub fn round_cluster_based(sol: &ClusterLpSolution, seed: u64) -> Result<Clustering> {
    let sampler = PivotSampler::new(sol)?;
    Ok(round_cluster_based_with(sol, &sampler, &mut rng_from_seed(seed)))
}

/// Pivot plus all remaining +neighbors.
pub fn round_classic_pivot_with(inst: &Instance, rng: &mut Rng) -> Clustering {
    let n = inst.n();
    let mut remaining = VertexSet::from_members(n, 0..n);
    let mut labels = alloc::vec![0; n];
    let mut next = 0;
    while !remaining.is_empty() {
        let pivot = uniform_member(&remaining, rng);
        let mut cluster = inst.plus_neighbors(pivot).clone();
        cluster.insert(pivot);
        for v in cluster.iter() {
            if remaining.contains(v) {
                remaining.remove(v);
                labels[v] = next;
            }
        }
        next += 1;
    }
    Clustering::from_labels(&labels)
}

pub fn round_classic_pivot(inst: &Instance, seed: u64) -> Clustering {
    round_classic_pivot_with(inst, &mut rng_from_seed(seed))
}

/// Cheapest of `trials` cluster-based and `trials` pivot roundings.
///
/// Trial `i` of the cluster-based stream uses seed `derive_seed(seed, 2i)`,
/// the pivot stream `derive_seed(seed, 2i + 1)`.
pub fn best_of(
    inst: &Instance,
    sol: &ClusterLpSolution,
    rules: &RuleSet,
    trials: usize,
    seed: u64,
) -> Result<(Clustering, u64)> {
    if trials == 0 {
        return Err(Error::validation("best_of needs at least one trial"));
    }
    check_sizes(inst, sol)?;
    let sampler = PivotSampler::new(sol)?;
    let mut best: Option<(Clustering, u64)> = None;
    for i in 0..trials as u64 {
        let a = round_cluster_based_with(sol, &sampler, &mut rng_from_seed(derive_seed(seed, 2 * i)));
        let b = round_pivot_with(
            inst,
            sol,
            &sampler,
            rules,
            &mut rng_from_seed(derive_seed(seed, 2 * i + 1)),
            |_, _, _| {},
        );
        for c in [a, b] {
            let cost = objective_clustering(inst, &c)?;
            if best.as_ref().is_none_or(|(_, bc)| cost < *bc) {
                best = Some((c, cost));
            }
        }
    }
    Ok(best.expect("trials > 0"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_exact;
    use crate::instance::{generate_planted, generate_random, pairs};
    use crate::lp::solve_cluster_lp_exact;
    use proptest::prelude::*;

    fn integral(labels: &[usize]) -> (Clustering, ClusterLpSolution) {
        let c = Clustering::from_labels(labels);
        let s = ClusterLpSolution::from_clustering(&c);
        (c, s)
    }

    #[test]
    fn integral_solutions_are_reproduced() {
        // clusters are +cliques, so every within-cluster pair is a short +edge
        let labels = [0, 1, 0, 2, 1, 0, 2, 2];
        let (c, sol) = integral(&labels);
        let inst = Instance::from_fn(8, |u, v| labels[u] == labels[v] || (u + v) % 5 == 0);
        for seed in 0..20 {
            assert_eq!(round_cluster_based(&sol, seed).unwrap(), c);
            assert_eq!(round_pivot(&inst, &sol, &RuleSet::alg3(), seed).unwrap().clustering, c);
            assert_eq!(round_pivot(&inst, &sol, &RuleSet::alg4(), seed).unwrap().clustering, c);
        }
        let (best, cost) = best_of(&inst, &sol, &RuleSet::alg3(), 3, 1).unwrap();
        assert_eq!(best, c);
        assert_eq!(cost, objective_clustering(&inst, &c).unwrap());
    }

    #[test]
    fn all_separated_gives_singletons() {
        let (_, sol) = integral(&[0, 1, 2, 3, 4]);
        let inst = generate_random(5, 0.6, 4).unwrap();
        for seed in 0..10 {
            for rules in [RuleSet::alg3(), RuleSet::alg4()] {
                assert_eq!(round_pivot(&inst, &sol, &rules, seed).unwrap().clustering, Clustering::singletons(5));
            }
            assert_eq!(round_cluster_based(&sol, seed).unwrap(), Clustering::singletons(5));
        }
    }

    #[test]
    fn classic_pivot_examples() {
        assert_eq!(round_classic_pivot(&Instance::from_fn(6, |_, _| true), 3), Clustering::one_cluster(6));
        assert_eq!(round_classic_pivot(&Instance::new(6, []).unwrap(), 3), Clustering::singletons(6));
        let bad = Instance::new(3, [(0, 1), (1, 2)]).unwrap();
        for seed in 0..30 {
            assert_eq!(objective_clustering(&bad, &round_classic_pivot(&bad, seed)).unwrap(), 1);
        }
    }

    #[test]
    fn best_of_rejects_zero_trials() {
        let (_, sol) = integral(&[0, 0]);
        let inst = Instance::new(2, [(0, 1)]).unwrap();
        assert!(matches!(best_of(&inst, &sol, &RuleSet::alg3(), 0, 1), Err(Error::Validation(_))));
    }

    #[test]
    fn rule_set_validation_and_boundary() {
        assert!(RuleSet::new("bad", 0.5, 0.4, MinusJoin::Linear).is_err());
        let r = RuleSet::alg4();
        assert_eq!(r.classify_plus(0.4), PlusClass::Short);
        assert_eq!(r.classify_plus(0.57), PlusClass::Dependent);
        assert_eq!(r.classify_plus(0.5700001), PlusClass::Independent);
    }

    /// Independent rounding: join with probability `1 − x` on every edge.
    fn independent_join_freq(
        inst: &Instance,
        sol: &ClusterLpSolution,
        pivot: usize,
        trials: usize,
        seed: u64,
    ) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        let mut counts = alloc::vec![0usize; inst.n()];
        for _ in 0..trials {
            for v in 0..inst.n() {
                if v != pivot && rng.random_bool(1.0 - sol.x_pair(pivot, v)) {
                    counts[v] += 1;
                }
            }
        }
        counts.into_iter().map(|c| c as f64 / trials as f64).collect()
    }

    #[test]
    fn zero_thresholds_degenerate_to_independent_rounding() {
        let rules = RuleSet::new("indep", 0.0, 0.0, MinusJoin::Linear).unwrap();
        let trials = 40_000;
        for seed in 0..10 {
            let inst = generate_random(6, 0.5, seed).unwrap();
            let (sol, _) = solve_cluster_lp_exact(&inst, 12).unwrap();
            let sampler = PivotSampler::new(&sol).unwrap();
            let all = VertexSet::from_members(6, 0..6);
            let mut rng = rng_from_seed(seed + 100);
            let mut counts = [0usize; 6];
            for _ in 0..trials {
                let (_, c) = pivot_cluster(&inst, &sol, &sampler, &rules, 0, &all, &mut rng);
                for v in c {
                    counts[v] += 1;
                }
            }
            let indep = independent_join_freq(&inst, &sol, 0, trials, seed + 200);
            for v in 1..6 {
                let p = 1.0 - sol.x_pair(0, v);
                let se = (p * (1.0 - p) / trials as f64).sqrt().max(1e-9);
                let a = counts[v] as f64 / trials as f64;
                assert!((a - indep[v]).abs() <= 6.0 * se + 1e-12, "seed {seed} v {v}: {a} vs {}", indep[v]);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn outputs_are_partitions_with_pivot_in_cluster(n in 1usize..9, seed in any::<u64>()) {
            let inst = generate_planted(n, 3, 0.2, seed).unwrap();
            let (sol, _) = solve_cluster_lp_exact(&inst, 12).unwrap();
            for rules in [RuleSet::alg3(), RuleSet::alg4()] {
                let t = round_pivot(&inst, &sol, &rules, seed).unwrap();
                let mut seen = alloc::vec![false; n];
                for st in &t.steps {
                    prop_assert_eq!(st.cluster[0], st.pivot);
                    prop_assert!(st.sampled.contains(st.pivot));
                    for &v in &st.cluster {
                        prop_assert!(!seen[v]);
                        seen[v] = true;
                    }
                }
                prop_assert!(seen.iter().all(|&s| s));
                prop_assert_eq!(&t, &round_pivot(&inst, &sol, &rules, seed).unwrap());
            }
            let (c, cost) = best_of(&inst, &sol, &RuleSet::alg3(), 4, seed).unwrap();
            prop_assert_eq!(cost, objective_clustering(&inst, &c).unwrap());
            prop_assert!(cost >= solve_exact(&inst, 12).unwrap().opt_value);
            // x = 0 pairs are never separated by cluster-based rounding
            let cb = round_cluster_based(&sol, seed).unwrap().labels();
            for (u, v) in pairs(n) {
                if sol.x_pair(u, v) == 0.0 {
                    prop_assert_eq!(cb[u], cb[v]);
                }
            }
        }
    }
}
