//! Budget functions and closed-form per-triangle cost and released budget.
//!
//! Edges of a triangle `(u, v, w)` are indexed `0 = uv`, `1 = uw`, `2 = vw`.

pub mod dtilde;
pub mod real;
pub mod verify;

use alloc::format;

use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::lp::ClusterLpSolution;
use crate::rounding::{MinusJoin, PlusClass, RuleSet};
use crate::set::VertexSet;
use crate::{Error, Result};
pub use real::{Dual, Interval, Real};

const FEAS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetSpec {
    pub alpha: f64,
}

impl BudgetSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(1.0..2.0).contains(&alpha) {
            return Err(Error::validation(format!("alpha = {alpha} outside [1, 2)")));
        }
        Ok(BudgetSpec { alpha })
    }

    /// `C_α = α / (1 − α/2)`.
    pub fn c_alpha(&self) -> f64 {
        self.alpha / (1.0 - self.alpha / 2.0)
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::validation(format!("x = {x} outside [0, 1]")));
    }
    Ok(())
}

pub(crate) fn bplus<R: Real>(c: R, x: R) -> R {
    c * x * x / (R::cst(1.0) + x)
}

pub(crate) fn bminus<R: Real>(c: R, x: R) -> R {
    c * (R::cst(1.0) + R::cst(2.0) * x) * (R::cst(1.0) - x) / (R::cst(2.0) * (R::cst(1.0) + x))
}

/// `C_α · x² / (1 + x)`.
pub fn budget_plus(alpha: f64, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(bplus(BudgetSpec::new(alpha)?.c_alpha(), x))
}

/// `C_α · (1 + 2x)(1 − x) / (2(1 + x))`.
pub fn budget_minus(alpha: f64, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(bminus(BudgetSpec::new(alpha)?.c_alpha(), x))
}

/// How an edge incident to the pivot joins the pivot's cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    Plus(PlusClass),
    Minus(MinusJoin),
}

impl EdgeKind {
    pub fn of(sign: Sign, x: f64, rules: &RuleSet) -> Self {
        match sign {
            Sign::Plus => EdgeKind::Plus(rules.classify_plus(x)),
            Sign::Minus => EdgeKind::Minus(rules.minus),
        }
    }

    pub fn sign(self) -> Sign {
        match self {
            EdgeKind::Plus(_) => Sign::Plus,
            EdgeKind::Minus(_) => Sign::Minus,
        }
    }

    /// `Pr[v ∈ C | u]` for an edge `uv` with co-clustering value `y`.
    pub(crate) fn inclusion<R: Real>(self, y: R) -> R {
        match self {
            EdgeKind::Plus(PlusClass::Short) => R::cst(1.0),
            EdgeKind::Plus(_) | EdgeKind::Minus(MinusJoin::Linear) => y,
            EdgeKind::Minus(MinusJoin::Quadratic) => {
                let x = R::cst(1.0) - y;
                R::cst(1.0) - x * x
            }
        }
    }

    pub(crate) fn budget<R: Real>(self, c: R, y: R) -> R {
        let x = R::cst(1.0) - y;
        match self {
            EdgeKind::Plus(_) => bplus(c, x),
            EdgeKind::Minus(_) => bminus(c, x),
        }
    }
}

/// Pivot, its two incident edges, and the opposite edge.
pub(crate) const PIVOTS: [(usize, usize, usize); 3] = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];

/// `(cost, Δ)` of a triangle summed over its three pivots, with every edge's kind fixed.
pub(crate) fn triangle_terms<R: Real>(kinds: [EdgeKind; 3], y: [R; 3], y_uvw: R, c: R) -> (R, R) {
    let mut cost = R::cst(0.0);
    let mut delta = R::cst(0.0);
    for (e1, e2, opp) in PIVOTS {
        let p1 = kinds[e1].inclusion(y[e1]);
        let p2 = kinds[e2].inclusion(y[e2]);
        let dep = EdgeKind::Plus(PlusClass::Dependent);
        let joint = if kinds[e1] == dep && kinds[e2] == dep { y_uvw } else { p1 * p2 };
        cost = cost
            + match kinds[opp].sign() {
                Sign::Plus => p1 + p2 - R::cst(2.0) * joint,
                Sign::Minus => joint,
            };
        delta = delta + (p1 + p2 - joint) * kinds[opp].budget(c, y[opp]);
    }
    (cost, delta)
}

/// `(cost, Δ)` of a degenerate triangle: the pivot is always in its own cluster.
pub(crate) fn degenerate_terms<R: Real>(kind: EdgeKind, y: R, c: R) -> (R, R) {
    let p = kind.inclusion(y);
    let per_pivot = match kind.sign() {
        Sign::Plus => R::cst(1.0) - p,
        Sign::Minus => p,
    };
    (R::cst(2.0) * per_pivot, R::cst(2.0) * kind.budget(c, y))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleProfile {
    /// Signs of `uv`, `uw`, `vw`.
    pub signs: [Sign; 3],
    /// `y_uv`, `y_uw`, `y_vw`.
    pub y: [f64; 3],
    pub y_uvw: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Profile {
    Triangle(TriangleProfile),
    Degenerate { sign: Sign, y: f64 },
}

impl TriangleProfile {
    pub fn new(signs: [Sign; 3], y: [f64; 3], y_uvw: f64) -> Self {
        TriangleProfile { signs, y, y_uvw }
    }

    /// The stand-in `(y, y, 1, y)` used for a degenerate pair: `+++` for a +pair, `−−+` for a −pair.
    pub fn degenerate_stand_in(sign: Sign, y: f64) -> Self {
        TriangleProfile::new([sign, sign, Sign::Plus], [y, y, 1.0], y)
    }

    pub fn kinds(&self, rules: &RuleSet) -> [EdgeKind; 3] {
        core::array::from_fn(|i| EdgeKind::of(self.signs[i], 1.0 - self.y[i], rules))
    }

    /// Largest violation of the feasibility constraints (`0` when feasible).
    pub fn infeasibility(&self, psd_region: bool) -> f64 {
        let [a, b, c] = self.y;
        let t = self.y_uvw;
        let mut worst: f64 = 0.0;
        for v in [a, b, c, t] {
            worst = worst.max(-v).max(v - 1.0);
        }
        let (xa, xb, xc) = (1.0 - a, 1.0 - b, 1.0 - c);
        worst = worst.max(xa - xb - xc).max(xb - xa - xc).max(xc - xa - xb);
        worst = worst.max(t - a).max(t - b).max(t - c);
        worst = worst.max(a + b - t - 1.0).max(a + c - t - 1.0).max(b + c - t - 1.0);
        let s = a + b + c;
        worst = worst.max(3.0 * t - s).max(s - 1.5 - 1.5 * t);
        if psd_region {
            // implied by the linear constraints on three vertices; kept as an explicit check
            for (p, q) in [(a, b), (a, c), (b, c)] {
                let off = t - p * q;
                worst = worst.max(off * off - (p - p * p) * (q - q * q));
            }
            worst = worst.max(a * a + b * b + c * c - 1.0 - 2.0 * a * b * c);
        }
        worst
    }

    pub fn is_feasible(&self, psd_region: bool) -> bool {
        self.infeasibility(psd_region) <= FEAS_TOL
    }

    /// Relabels vertices by a permutation `perm` of `(u, v, w)`.
    pub fn relabel(&self, perm: [usize; 3]) -> Self {
        // edge between original vertices (i, j) → index
        let edge = |i: usize, j: usize| match (i.min(j), i.max(j)) {
            (0, 1) => 0,
            (0, 2) => 1,
            _ => 2,
        };
        let ends = [(0, 1), (0, 2), (1, 2)];
        let mut signs = self.signs;
        let mut y = self.y;
        for (k, &(i, j)) in ends.iter().enumerate() {
            let src = edge(perm[i], perm[j]);
            signs[k] = self.signs[src];
            y[k] = self.y[src];
        }
        TriangleProfile { signs, y, y_uvw: self.y_uvw }
    }

    /// Cluster-LP solution on three vertices realising this profile, when one exists.
    pub fn embed(&self) -> Option<(Instance, ClusterLpSolution)> {
        let [a, b, c] = self.y;
        let t = self.y_uvw;
        let z = [
            (&[0usize, 1, 2][..], t),
            (&[0, 1][..], a - t),
            (&[0, 2][..], b - t),
            (&[1, 2][..], c - t),
            (&[0][..], 1.0 - a - b + t),
            (&[1][..], 1.0 - a - c + t),
            (&[2][..], 1.0 - b - c + t),
        ];
        if z.iter().any(|&(_, v)| v < -FEAS_TOL) {
            return None;
        }
        let support = z.iter().map(|&(s, v)| (VertexSet::from_members(3, s.iter().copied()), v.max(0.0)));
        let sol = ClusterLpSolution::from_support(3, support).ok()?;
        let inst = Instance::from_fn(3, |u, v| {
            let e = match (u, v) {
                (0, 1) => 0,
                (0, 2) => 1,
                _ => 2,
            };
            self.signs[e] == Sign::Plus
        });
        Some((inst, sol))
    }
}

/// `(cost(T), Δ(T))` for a feasible profile.
pub fn cost_and_delta(profile: &Profile, rules: &RuleSet, budgets: &BudgetSpec) -> Result<(f64, f64)> {
    let c = budgets.c_alpha();
    match *profile {
        Profile::Triangle(t) => {
            if !t.is_feasible(false) {
                return Err(Error::validation(format!("infeasible triangle {t:?}")));
            }
            Ok(triangle_terms(t.kinds(rules), t.y, t.y_uvw, c))
        }
        Profile::Degenerate { sign, y } => {
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::validation(format!("y = {y} outside [0, 1]")));
            }
            Ok(degenerate_terms(EdgeKind::of(sign, 1.0 - y, rules), y, c))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng as _;
    use Sign::{Minus as M, Plus as P};

    #[test]
    fn budget_examples() {
        assert_eq!(budget_plus(1.3, 0.0).unwrap(), 0.0);
        assert_eq!(budget_minus(1.7, 1.0).unwrap(), 0.0);
        // (1.56 / 0.22) · (0.16 / 1.4)
        let expect = 1.56 / 0.22 * (0.16 / 1.4);
        assert!((budget_plus(1.56, 0.4).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 0.810390).abs() < 1e-6);
        assert!(budget_plus(2.0, 0.5).is_err());
        assert!(budget_plus(1.5, 1.5).is_err());
        assert!(budget_minus(0.9, 0.5).is_err());
    }

    #[test]
    fn budget_shape_on_grid() {
        for alpha in [1.0, 4.0 / 3.0, 1.485, 1.56, 1.99] {
            let f = |k: usize| budget_plus(alpha, k as f64 / 1000.0).unwrap();
            let g = |k: usize| budget_minus(alpha, k as f64 / 1000.0).unwrap();
            for k in 1..1000 {
                assert!(f(k) >= f(k - 1));
                assert!(f(k + 1) - 2.0 * f(k) + f(k - 1) >= -1e-12);
                assert!(g(k) <= g(k - 1));
            }
        }
    }

    #[test]
    fn budget_bound_claim() {
        // C_α x/(1+x) ≥ 2 ⇔ x ≥ (2−α)/(2α−2) = 0.392857… at α = 1.56
        let threshold: f64 = (2.0 - 1.56) / (2.0 * 1.56 - 2.0);
        assert!((threshold - 0.392857).abs() < 1e-6);
        for k in 4000..=10_000 {
            let x = k as f64 / 10_000.0;
            assert!(budget_plus(1.56, x).unwrap() >= 2.0 * x - 1e-12, "x = {x}");
        }
        assert!(budget_plus(1.56, 0.39).unwrap() < 2.0 * 0.39);
    }

    #[test]
    fn all_long_plus_example() {
        let t = TriangleProfile::new([P, P, P], [0.5, 0.5, 0.5], 0.25);
        let b = BudgetSpec::new(1.56).unwrap();
        let (cost, delta) = cost_and_delta(&Profile::Triangle(t), &RuleSet::alg3(), &b).unwrap();
        // per pivot: 2·0.5 − 2·0.25 = 0.5; released (1 − 0.25)·b⁺(0.5)
        assert!((cost - 1.5).abs() < 1e-12);
        let expect = 3.0 * 0.75 * budget_plus(1.56, 0.5).unwrap();
        assert!((delta - expect).abs() < 1e-12);
        assert!((delta - 2.6591).abs() < 1e-4);
    }

    #[test]
    fn all_short_plus_has_zero_cost() {
        let t = TriangleProfile::new([P, P, P], [0.8, 0.7, 0.9], 0.7);
        let (cost, delta) =
            cost_and_delta(&Profile::Triangle(t), &RuleSet::alg3(), &BudgetSpec::new(1.56).unwrap()).unwrap();
        assert_eq!(cost, 0.0);
        assert!(delta >= 0.0);
    }

    #[test]
    fn infeasible_profile_rejected() {
        let t = TriangleProfile::new([P, P, P], [0.5, 0.5, 0.5], 0.6);
        assert!(cost_and_delta(&Profile::Triangle(t), &RuleSet::alg3(), &BudgetSpec::new(1.5).unwrap()).is_err());
        assert!(TriangleProfile::new([P, P, P], [0.5, 0.5, 0.5], 0.0).is_feasible(false));
        // (t − ab)² ≤ a(1−a)·b(1−b) is tight here but holds
        assert!(TriangleProfile::new([P, P, P], [0.5, 0.5, 0.5], 0.0).is_feasible(true));
    }

    #[test]
    fn degenerate_closed_forms() {
        let b = BudgetSpec::new(1.56).unwrap();
        let (cost, delta) = cost_and_delta(&Profile::Degenerate { sign: M, y: 0.3 }, &RuleSet::alg3(), &b).unwrap();
        assert!((cost - 0.6).abs() < 1e-12);
        assert!((delta - 2.0 * budget_minus(1.56, 0.7).unwrap()).abs() < 1e-12);
        let (cost, _) = cost_and_delta(&Profile::Degenerate { sign: M, y: 0.3 }, &RuleSet::alg4(), &b).unwrap();
        assert!((cost - 2.0 * (1.0 - 0.49)).abs() < 1e-12);
        let (cost, _) = cost_and_delta(&Profile::Degenerate { sign: P, y: 0.7 }, &RuleSet::alg3(), &b).unwrap();
        assert_eq!(cost, 0.0);
    }

    fn random_feasible(rng: &mut crate::Rng) -> TriangleProfile {
        loop {
            let y = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let lo = (y[0] + y[1] - 1.0).max(y[0] + y[2] - 1.0).max(y[1] + y[2] - 1.0).max(0.0);
            let hi = y[0].min(y[1]).min(y[2]);
            if lo <= hi {
                let t = lo + (hi - lo) * rng.random::<f64>();
                let signs = core::array::from_fn(|_| if rng.random_bool(0.5) { P } else { M });
                return TriangleProfile::new(signs, y, t);
            }
        }
    }

    proptest! {
        #[test]
        fn relabel_invariance(seed in any::<u64>(), alpha in 1.0f64..1.99) {
            let mut rng = rng_from_seed(seed);
            let t = random_feasible(&mut rng);
            let b = BudgetSpec::new(alpha).unwrap();
            for rules in [RuleSet::alg3(), RuleSet::alg4()] {
                let base = cost_and_delta(&Profile::Triangle(t), &rules, &b).unwrap();
                for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    let r = cost_and_delta(&Profile::Triangle(t.relabel(perm)), &rules, &b).unwrap();
                    prop_assert!((r.0 - base.0).abs() < 1e-12 && (r.1 - base.1).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn embedding_reproduces_statistics(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let t = random_feasible(&mut rng);
            let (inst, sol) = t.embed().unwrap();
            let s = sol.derive_triple_stats(0, 1, 2);
            prop_assert!((s.y_uv - t.y[0]).abs() < 1e-12);
            prop_assert!((s.y_uw - t.y[1]).abs() < 1e-12);
            prop_assert!((s.y_vw - t.y[2]).abs() < 1e-12);
            prop_assert!((s.y_uvw - t.y_uvw).abs() < 1e-12);
            prop_assert_eq!(inst.is_plus(0, 1), t.signs[0] == P);
            prop_assert_eq!(inst.is_plus(1, 2), t.signs[2] == P);
        }

        #[test]
        fn covariance_blocks_follow_from_linear_constraints(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let t = random_feasible(&mut rng);
            prop_assert!(t.is_feasible(true));
        }

        #[test]
        fn all_minus_is_nonnegative(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let mut t = random_feasible(&mut rng);
            t.signs = [M, M, M];
            for alpha in [1.0, 4.0 / 3.0, 1.56] {
                let b = BudgetSpec::new(alpha).unwrap();
                let (cost, delta) = cost_and_delta(&Profile::Triangle(t), &RuleSet::alg3(), &b).unwrap();
                prop_assert!(delta - cost >= -1e-9);
            }
        }
    }
}
