//! Seeded Monte Carlo and grid work fanned out with rayon.
//!
//! Work is cut into fixed chunks whose seeds depend only on `(seed, chunk index)`, and chunk
//! results are merged in index order, so outputs do not depend on the number of workers.

use clusterlp_core::linalg::Matrix;
use clusterlp_core::lp::ClusterLpSolution;
use clusterlp_core::rounding::{pivot_cluster, round_cluster_based_with, PivotSampler, RuleSet};
use clusterlp_core::sdp::{enumerate_cells, Discretization, ModelCell, SdpModel};
use clusterlp_core::triangle::dtilde::d_tilde;
use clusterlp_core::triangle::verify::{verify_degenerate, verify_slice, VerifyOptions, VerifyReport};
use clusterlp_core::triangle::{budget_minus, budget_plus, BudgetSpec, Sign, TriangleProfile};
use clusterlp_core::{derive_seed, instance::pairs, rng_from_seed, Error, Instance, Result, Rng, VertexSet};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Trials per chunk.
pub const CHUNK: u64 = 10_000;

/// Runs `f` inside a pool of `workers` threads (`None` = rayon's default).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build().expect("thread pool").install(f),
    }
}

/// Splits `trials` into chunks; chunk `c` draws from `derive_seed(seed, c)`.
pub fn chunked<A: Send>(
    trials: u64,
    seed: u64,
    per_chunk: impl Fn(&mut Rng, u64) -> A + Sync,
    merge: impl Fn(A, A) -> A,
) -> Option<A> {
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(trials - c * CHUNK);
            per_chunk(&mut rng_from_seed(derive_seed(seed, c)), count)
        })
        .collect();
    parts.into_iter().reduce(merge)
}

fn add_vec<T: Copy + std::ops::AddAssign>(mut a: Vec<T>, b: Vec<T>) -> Vec<T> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Empirical `Pr[u, v separated]` under cluster-based rounding, indexed like `pairs(n)`.
pub fn separation_frequencies(sol: &ClusterLpSolution, trials: u64, seed: u64) -> Result<Vec<f64>> {
    let sampler = PivotSampler::new(sol)?;
    let n = sol.n();
    let pair_list: Vec<(usize, usize)> = pairs(n).collect();
    let counts = chunked(
        trials,
        seed,
        |rng, count| {
            let mut sep = vec![0u64; pair_list.len()];
            for _ in 0..count {
                let labels = round_cluster_based_with(sol, &sampler, rng).labels();
                for (k, &(u, v)) in pair_list.iter().enumerate() {
                    sep[k] += u64::from(labels[u] != labels[v]);
                }
            }
            sep
        },
        add_vec,
    )
    .unwrap_or_default();
    Ok(counts.into_iter().map(|c| c as f64 / trials as f64).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotMarginals {
    pub pivot: usize,
    pub trials: u64,
    /// `Pr[v ∈ C]`.
    pub inclusion: Vec<f64>,
    /// `Pr[v, w ∈ C]`.
    pub joint: Matrix,
}

/// Repeats the first pivot step with a fixed pivot over the whole vertex set.
pub fn forced_pivot_marginals(
    inst: &Instance,
    sol: &ClusterLpSolution,
    rules: &RuleSet,
    pivot: usize,
    trials: u64,
    seed: u64,
) -> Result<PivotMarginals> {
    let n = inst.n();
    if pivot >= n || sol.n() != n {
        return Err(Error::Validation(format!("pivot {pivot} or solution size does not match n = {n}")));
    }
    let sampler = PivotSampler::new(sol)?;
    let all = VertexSet::from_members(n, 0..n);
    let counts = chunked(
        trials,
        seed,
        |rng, count| {
            let mut c = vec![0u64; n * n];
            for _ in 0..count {
                let (_, cluster) = pivot_cluster(inst, sol, &sampler, rules, pivot, &all, rng);
                for &v in &cluster {
                    for &w in &cluster {
                        c[v * n + w] += 1;
                    }
                }
            }
            c
        },
        add_vec,
    )
    .unwrap_or_default();
    let t = trials as f64;
    Ok(PivotMarginals {
        pivot,
        trials,
        inclusion: (0..n).map(|v| counts[v * n + v] as f64 / t).collect(),
        joint: Matrix::from_fn(n, |v, w| counts[v * n + w] as f64 / t),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleEstimate {
    pub trials: u64,
    pub cost: f64,
    pub cost_se: f64,
    pub delta: f64,
    pub delta_se: f64,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: u64,
    s: [f64; 2],
    ss: [f64; 2],
}

impl Moments {
    fn push(&mut self, x: [f64; 2]) {
        self.n += 1;
        for ((s, ss), v) in self.s.iter_mut().zip(&mut self.ss).zip(x) {
            *s += v;
            *ss += v * v;
        }
    }

    fn merge(mut self, o: Moments) -> Moments {
        self.n += o.n;
        for k in 0..2 {
            self.s[k] += o.s[k];
            self.ss[k] += o.ss[k];
        }
        self
    }

    fn mean_se(&self, k: usize) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.s[k] / n;
        let var = ((self.ss[k] - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Simulates the pivot rule on a three-vertex embedding of `profile`: a uniform pivot, then
/// `3·[opposite edge pays]` and `3·[C meets the opposite edge]·b` as unbiased samples of `cost` and `Δ`.
pub fn simulate_triangle(
    profile: &TriangleProfile,
    rules: &RuleSet,
    budgets: &BudgetSpec,
    trials: u64,
    seed: u64,
) -> Result<TriangleEstimate> {
    if trials < 2 {
        return Err(Error::Validation("need at least two trials".into()));
    }
    let (inst, sol) =
        profile.embed().ok_or_else(|| Error::Validation(format!("profile {profile:?} has no embedding")))?;
    let sampler = PivotSampler::new(&sol)?;
    let all = VertexSet::from_members(3, 0..3);
    // opposite edge index for pivots 0, 1, 2
    let opposite = [(1, 2, 2), (0, 2, 1), (0, 1, 0)];
    let mut budget = [0.0; 3];
    for (b, (&sign, &y)) in budget.iter_mut().zip(profile.signs.iter().zip(&profile.y)) {
        *b = match sign {
            Sign::Plus => budget_plus(budgets.alpha, 1.0 - y)?,
            Sign::Minus => budget_minus(budgets.alpha, 1.0 - y)?,
        };
    }
    let m = chunked(
        trials,
        seed,
        |rng, count| {
            let mut m = Moments::default();
            for _ in 0..count {
                let pivot = rng.random_range(0..3);
                let (_, cluster) = pivot_cluster(&inst, &sol, &sampler, rules, pivot, &all, rng);
                let (v, w, e) = opposite[pivot];
                let (iv, iw) = (cluster.contains(&v), cluster.contains(&w));
                let pays = match profile.signs[e] {
                    Sign::Plus => iv != iw,
                    Sign::Minus => iv && iw,
                };
                let meets = iv || iw;
                m.push([3.0 * f64::from(u8::from(pays)), 3.0 * f64::from(u8::from(meets)) * budget[e]]);
            }
            m
        },
        Moments::merge,
    )
    .expect("trials > 0");
    let (cost, cost_se) = m.mean_se(0);
    let (delta, delta_se) = m.mean_se(1);
    Ok(TriangleEstimate { trials, cost, cost_se, delta, delta_se })
}

/// [`clusterlp_core::triangle::verify::verify_lemmas`] with one task per `y_uv` value.
pub fn verify_parallel(opts: &VerifyOptions) -> Result<VerifyReport> {
    let n = opts.resolution()?;
    let slices = (0..=n).into_par_iter().map(|a| verify_slice(opts, a)).collect::<Result<Vec<_>>>()?;
    let acc = slices.into_iter().fold(verify_degenerate(opts)?, |acc, s| acc.merge(s));
    Ok(acc.finish(opts))
}

/// [`clusterlp_core::sdp::assemble_matrices`] with one task per cell.
pub fn assemble_parallel(disc: &Discretization, rules: &RuleSet, budgets: &BudgetSpec) -> Result<SdpModel> {
    let cells = enumerate_cells(disc)
        .into_par_iter()
        .map(|cell| match d_tilde(&cell.bbox, rules, budgets) {
            Ok(d) => Ok(Some(ModelCell { cell, d_tilde: d.value })),
            Err(Error::EmptyCell) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    SdpModel::from_cells(budgets.alpha, rules, disc.clone(), cells.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clusterlp_core::instance::generate_random;
    use clusterlp_core::lp::solve_cluster_lp_exact;
    use clusterlp_core::sdp::assemble_matrices;
    use clusterlp_core::triangle::verify::verify_lemmas;

    #[test]
    fn results_do_not_depend_on_workers() {
        let inst = generate_random(6, 0.5, 4).unwrap();
        let (sol, _) = solve_cluster_lp_exact(&inst, 12).unwrap();
        let one = with_workers(Some(1), || separation_frequencies(&sol, 25_000, 9).unwrap());
        let three = with_workers(Some(3), || separation_frequencies(&sol, 25_000, 9).unwrap());
        assert_eq!(one, three);
    }

    #[test]
    fn parallel_wrappers_match_serial() {
        let opts = VerifyOptions::new(1.56, RuleSet::alg3(), 0.1);
        assert_eq!(verify_parallel(&opts).unwrap(), verify_lemmas(&opts).unwrap());
        let disc = Discretization::new(vec![0.0, 0.5, 1.0], vec![]).unwrap();
        let b = BudgetSpec::new(1.485).unwrap();
        assert_eq!(
            assemble_parallel(&disc, &RuleSet::alg4(), &b).unwrap(),
            assemble_matrices(&disc, &RuleSet::alg4(), &b).unwrap()
        );
    }

    #[test]
    fn triangle_simulation_is_close() {
        let t = TriangleProfile::new([Sign::Plus; 3], [0.5, 0.5, 0.5], 0.25);
        let b = BudgetSpec::new(1.56).unwrap();
        let est = simulate_triangle(&t, &RuleSet::alg3(), &b, 200_000, 1).unwrap();
        assert!((est.cost - 1.5).abs() < 5.0 * est.cost_se, "{est:?}");
        assert!(est.cost_se > 0.0 && est.cost_se < 0.01);
    }
}
