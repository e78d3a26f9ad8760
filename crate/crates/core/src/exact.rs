//! Exhaustive search over set partitions.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::instance::{Clustering, Instance};
use crate::{Error, Result};

pub const DEFAULT_MAX_N: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptResult {
    pub opt_value: u64,
    pub witness: Clustering,
    /// Complete partitions whose cost was evaluated (pruned subtrees are not counted).
    pub partitions_enumerated: u64,
}

/// Bell number `B(n)`, or `None` on `u128` overflow.
pub fn bell(n: usize) -> Option<u128> {
    let mut row: Vec<u128> = vec![1];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last()?);
        for &r in &row {
            let last = *next.last()?;
            next.push(last.checked_add(r)?);
        }
        row = next;
    }
    row.first().copied()
}

fn bell_text(n: usize) -> String {
    match bell(n) {
        Some(b) => format!("Bell({n}) = {b} partitions"),
        None => format!("Bell({n}) > 2^128 partitions"),
    }
}

/// Minimum-disagreement clustering by depth-first search over restricted-growth strings.
///
/// Ties resolve to the lexicographically smallest restricted-growth string.
pub fn solve_exact(inst: &Instance, max_n: usize) -> Result<OptResult> {
    let n = inst.n();
    if n > max_n {
        return Err(Error::Capacity { what: "exact oracle".into(), n, max_n, cost: bell_text(n) });
    }
    let units: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let bound = inst.num_plus().min(inst.num_minus()) as u64;
    let search = UnitSearch::new(inst, &units, None);
    Ok(search.run(Some(bound)).expect("singletons or one cluster stays within the initial bound"))
}

/// `true` iff `c` keeps every atom of `k` together and co-clusters only admissible cross-atom pairs.
pub fn is_good_clustering(c: &Clustering, k: &Clustering, adm: &BTreeSet<(usize, usize)>) -> Result<bool> {
    let n = c.num_vertices();
    if k.num_vertices() != n {
        return Err(Error::validation(format!("clustering covers {n} vertices, atoms cover {}", k.num_vertices())));
    }
    let cl = c.labels();
    let kl = k.labels();
    for u in 0..n {
        for v in u + 1..n {
            if kl[u] == kl[v] {
                if cl[u] != cl[v] {
                    return Ok(false);
                }
            } else if cl[u] == cl[v] && !adm.contains(&(u, v)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Cheapest clustering that is good with respect to `(atoms, adm)`, by search over atom partitions.
pub fn solve_exact_good(
    inst: &Instance,
    atoms: &Clustering,
    adm: &BTreeSet<(usize, usize)>,
    max_units: usize,
) -> Result<OptResult> {
    let m = atoms.clusters().len();
    if atoms.num_vertices() != inst.n() {
        return Err(Error::validation("atoms do not cover the instance"));
    }
    if m > max_units {
        return Err(Error::Capacity {
            what: "good-clustering search".into(),
            n: m,
            max_n: max_units,
            cost: bell_text(m),
        });
    }
    let units = atoms.clusters().to_vec();
    let mut compat = vec![vec![true; m]; m];
    for a in 0..m {
        for b in 0..m {
            if a != b {
                compat[a][b] = units[a].iter().all(|&u| units[b].iter().all(|&v| adm.contains(&(u.min(v), u.max(v)))));
            }
        }
    }
    let search = UnitSearch::new(inst, &units, Some(compat));
    Ok(search.run(None).expect("atoms as clusters is always good"))
}

struct UnitSearch {
    n: usize,
    units: Vec<Vec<usize>>,
    /// `plus[a][b]` = +pairs between units a and b; `total[a][b]` = |a|·|b|.
    plus: Vec<Vec<u64>>,
    total: Vec<Vec<u64>>,
    base_cost: u64,
    compat: Option<Vec<Vec<bool>>>,
}

struct State {
    assign: Vec<usize>,
    best: Option<(u64, Vec<usize>)>,
    bound: Option<u64>,
    leaves: u64,
}

impl UnitSearch {
    fn new(inst: &Instance, units: &[Vec<usize>], compat: Option<Vec<Vec<bool>>>) -> Self {
        let m = units.len();
        let mut plus = vec![vec![0u64; m]; m];
        let mut total = vec![vec![0u64; m]; m];
        let mut base_cost = 0;
        for a in 0..m {
            for (i, &u) in units[a].iter().enumerate() {
                for &v in &units[a][i + 1..] {
                    if !inst.is_plus(u, v) {
                        base_cost += 1;
                    }
                }
            }
            for b in 0..m {
                if a != b {
                    total[a][b] = (units[a].len() * units[b].len()) as u64;
                    plus[a][b] =
                        units[a].iter().map(|&u| units[b].iter().filter(|&&v| inst.is_plus(u, v)).count() as u64).sum();
                }
            }
        }
        UnitSearch { n: inst.n(), units: units.to_vec(), plus, total, base_cost, compat }
    }

    fn run(&self, bound: Option<u64>) -> Option<OptResult> {
        let m = self.units.len();
        let mut st = State { assign: Vec::with_capacity(m), best: None, bound, leaves: 0 };
        self.dfs(&mut st, 0, self.base_cost);
        let (opt_value, assign) = st.best?;
        let mut labels = vec![0; self.n];
        for (a, &block) in assign.iter().enumerate() {
            for &v in &self.units[a] {
                labels[v] = block;
            }
        }
        Some(OptResult { opt_value, witness: Clustering::from_labels(&labels), partitions_enumerated: st.leaves })
    }

    fn pruned(st: &State, cost: u64) -> bool {
        match (&st.best, st.bound) {
            (Some((best, _)), _) => cost >= *best,
            (None, Some(b)) => cost > b,
            (None, None) => false,
        }
    }

    fn dfs(&self, st: &mut State, a: usize, cost: u64) {
        if Self::pruned(st, cost) {
            return;
        }
        if a == self.units.len() {
            st.leaves += 1;
            st.best = Some((cost, st.assign.clone()));
            return;
        }
        let blocks = st.assign.iter().copied().max().map_or(0, |b| b + 1);
        for block in 0..=blocks {
            if let Some(compat) = &self.compat {
                if (0..a).any(|b| st.assign[b] == block && !compat[a][b]) {
                    continue;
                }
            }
            let mut delta = 0;
            for b in 0..a {
                delta += if st.assign[b] == block { self.total[a][b] - self.plus[a][b] } else { self.plus[a][b] };
            }
            st.assign.push(block);
            self.dfs(st, a + 1, cost + delta);
            st.assign.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random, objective_clustering};
    use crate::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng as _;

    /// Plain enumeration of all restricted-growth strings, no pruning.
    fn brute_force(inst: &Instance) -> (u64, Vec<usize>, u64) {
        let n = inst.n();
        let mut rgs = vec![0usize; n];
        let mut best: Option<(u64, Vec<usize>)> = None;
        let mut count = 0;
        loop {
            count += 1;
            let c = objective_clustering(inst, &Clustering::from_labels(&rgs)).unwrap();
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, rgs.clone()));
            }
            // next restricted-growth string in lexicographic order
            let mut i = n;
            loop {
                if i <= 1 {
                    let (c, r) = best.unwrap();
                    return (c, r, count);
                }
                i -= 1;
                let max_prev = rgs[..i].iter().copied().max().unwrap();
                if rgs[i] <= max_prev {
                    rgs[i] += 1;
                    for r in rgs.iter_mut().skip(i + 1) {
                        *r = 0;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn bell_numbers() {
        let expect = [1u128, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597];
        for (n, &b) in expect.iter().enumerate() {
            assert_eq!(bell(n), Some(b));
        }
        assert_eq!(bell(300), None);
    }

    #[test]
    fn small_examples() {
        let p3 = Instance::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(solve_exact(&p3, 12).unwrap().opt_value, 1);
        let edge = Instance::new(2, [(0, 1)]).unwrap();
        let r = solve_exact(&edge, 12).unwrap();
        assert_eq!(r.opt_value, 0);
        assert_eq!(r.witness, Clustering::one_cluster(2));
    }

    #[test]
    fn capacity_error_names_bell() {
        let inst = generate_random(13, 0.5, 1).unwrap();
        match solve_exact(&inst, 12) {
            Err(Error::Capacity { cost, .. }) => assert!(cost.contains("Bell(13) = 27644437")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn matches_unpruned_enumeration_including_tie_break() {
        for seed in 0..40 {
            let mut rng = rng_from_seed(seed);
            let n = rng.random_range(1..8);
            let inst = generate_random(n, rng.random_range(0.0..1.0), seed).unwrap();
            let (opt, rgs, count) = brute_force(&inst);
            assert_eq!(count as u128, bell(n).unwrap());
            let r = solve_exact(&inst, 12).unwrap();
            assert_eq!(r.opt_value, opt);
            assert_eq!(r.witness, Clustering::from_labels(&rgs));
        }
    }

    #[test]
    fn good_clustering_examples() {
        let k = Clustering::new(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        let none = BTreeSet::new();
        assert!(is_good_clustering(&k, &k, &none).unwrap());

        let k2 = Clustering::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        assert!(!is_good_clustering(&Clustering::singletons(3), &k2, &none).unwrap());

        let adm: BTreeSet<_> = [(0, 2)].into_iter().collect();
        let c = Clustering::new(3, vec![vec![0, 2], vec![1]]).unwrap();
        assert!(is_good_clustering(&c, &k, &adm).unwrap());
    }

    #[test]
    fn good_search_with_everything_admissible_is_opt() {
        for seed in 0..10 {
            let inst = generate_random(7, 0.5, seed).unwrap();
            let adm: BTreeSet<_> = crate::instance::pairs(7).collect();
            let good = solve_exact_good(&inst, &Clustering::singletons(7), &adm, 12).unwrap();
            assert_eq!(good.opt_value, solve_exact(&inst, 12).unwrap().opt_value);
            assert!(is_good_clustering(&good.witness, &Clustering::singletons(7), &adm).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn opt_is_a_lower_bound(n in 1usize..9, p in 0.0f64..1.0, seed in any::<u64>(), lseed in any::<u64>()) {
            let inst = generate_random(n, p, seed).unwrap();
            let r = solve_exact(&inst, 12).unwrap();
            prop_assert_eq!(objective_clustering(&inst, &r.witness).unwrap(), r.opt_value);
            prop_assert!(r.opt_value <= inst.num_plus().min(inst.num_minus()) as u64);
            let mut rng = rng_from_seed(lseed);
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            prop_assert!(r.opt_value <= objective_clustering(&inst, &Clustering::from_labels(&labels)).unwrap());
            if n > 1 {
                let keep: Vec<usize> = (0..n).filter(|&v| v != (lseed as usize) % n).collect();
                prop_assert!(solve_exact(&inst.induced(&keep), 12).unwrap().opt_value <= r.opt_value);
            }
        }
    }
}
