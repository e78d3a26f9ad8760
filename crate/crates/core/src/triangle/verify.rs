//! Exhaustive grid check of `Δ(T) − cost(T)` over feasible triangles.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{degenerate_terms, triangle_terms, BudgetSpec, EdgeKind, Profile, Sign, TriangleProfile};
use crate::rounding::RuleSet;
use crate::{Error, Result};

/// Sign patterns up to relabeling, ordered `uv, uw, vw`.
pub const PATTERNS: [[Sign; 3]; 4] = [
    [Sign::Plus, Sign::Plus, Sign::Plus],
    [Sign::Plus, Sign::Plus, Sign::Minus],
    [Sign::Plus, Sign::Minus, Sign::Minus],
    [Sign::Minus, Sign::Minus, Sign::Minus],
];

pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub alpha: f64,
    pub rules: RuleSet,
    pub step: f64,
    /// Restrict to triples whose 2×2 covariance blocks are PSD.
    pub psd_region: bool,
    pub triangles: bool,
    pub degenerate: bool,
}

impl VerifyOptions {
    pub fn new(alpha: f64, rules: RuleSet, step: f64) -> Self {
        VerifyOptions { alpha, rules, step, psd_region: false, triangles: true, degenerate: true }
    }

    /// Grid resolution `N` with `step = 1/N`.
    pub fn resolution(&self) -> Result<usize> {
        BudgetSpec::new(self.alpha)?;
        if !(self.step > 0.0 && self.step <= 0.5) {
            return Err(Error::validation(format!("step = {} outside (0, 0.5]", self.step)));
        }
        let n = libm::round(1.0 / self.step);
        if libm::fabs(n * self.step - 1.0) > 1e-9 || n > 1000.0 {
            return Err(Error::validation(format!("step = {} must be 1/N for an integer N ≤ 1000", self.step)));
        }
        Ok(n as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMin {
    pub pattern: String,
    pub kinds: [EdgeKind; 3],
    pub points: u64,
    pub min: f64,
    pub argmin: TriangleProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateMin {
    pub sign: Sign,
    pub points: u64,
    pub min: f64,
    pub argmin_y: f64,
    /// Minimum of the `(y, y, 1, y)` stand-in on the same grid.
    pub stand_in_min: f64,
    /// `max(stand-in − direct)`; the stand-in never exceeds the direct value when `≤ 0`.
    pub stand_in_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub alpha: f64,
    pub rules: String,
    pub step: f64,
    pub psd_region: bool,
    pub points: u64,
    pub min: f64,
    pub argmin: Option<Profile>,
    pub cells: Vec<CellMin>,
    pub degenerate: Vec<DegenerateMin>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.min >= -VERIFY_TOL && self.degenerate.iter().all(|d| d.stand_in_excess <= VERIFY_TOL)
    }
}

fn pattern_name(signs: &[Sign; 3]) -> String {
    signs.iter().map(|s| s.symbol()).collect()
}

/// Partial result over one value of `y_uv`; merge with [`VerifyAccumulator::merge`].
#[derive(Clone, Debug, Default)]
pub struct VerifyAccumulator {
    cells: BTreeMap<(usize, [EdgeKind; 3]), CellMin>,
    degenerate: Vec<DegenerateMin>,
}

impl VerifyAccumulator {
    pub fn merge(mut self, other: VerifyAccumulator) -> Self {
        for (k, c) in other.cells {
            match self.cells.get_mut(&k) {
                Some(mine) => {
                    mine.points += c.points;
                    if c.min < mine.min {
                        mine.min = c.min;
                        mine.argmin = c.argmin;
                    }
                }
                None => {
                    self.cells.insert(k, c);
                }
            }
        }
        self.degenerate.extend(other.degenerate);
        self
    }

    pub fn finish(self, opts: &VerifyOptions) -> VerifyReport {
        let cells: Vec<CellMin> = self.cells.into_values().collect();
        let mut min = f64::INFINITY;
        let mut argmin = None;
        let mut points = 0;
        for c in &cells {
            points += c.points;
            if c.min < min {
                min = c.min;
                argmin = Some(Profile::Triangle(c.argmin));
            }
        }
        for d in &self.degenerate {
            points += d.points;
            if d.min < min {
                min = d.min;
                argmin = Some(Profile::Degenerate { sign: d.sign, y: d.argmin_y });
            }
        }
        VerifyReport {
            alpha: opts.alpha,
            rules: opts.rules.name.clone(),
            step: opts.step,
            psd_region: opts.psd_region,
            points,
            min,
            argmin,
            cells,
            degenerate: self.degenerate,
        }
    }
}

fn kinds_on_grid(signs: &[Sign; 3], ks: [usize; 3], n: usize, rules: &RuleSet) -> [EdgeKind; 3] {
    core::array::from_fn(|i| EdgeKind::of(signs[i], (n - ks[i]) as f64 / n as f64, rules))
}

/// All triangles with `y_uv = a/N`.
pub fn verify_slice(opts: &VerifyOptions, a: usize) -> Result<VerifyAccumulator> {
    let n = opts.resolution()?;
    let c_alpha = BudgetSpec::new(opts.alpha)?.c_alpha();
    let mut acc = VerifyAccumulator::default();
    if !opts.triangles || a > n {
        return Ok(acc);
    }
    let nf = n as f64;
    for b in 0..=n {
        for c in 0..=n {
            // a nonempty range implies the triangle inequality and the weaker-lemma bounds
            let lo = (a + b).saturating_sub(n).max((a + c).saturating_sub(n)).max((b + c).saturating_sub(n));
            let hi = a.min(b).min(c);
            for t in lo..=hi {
                let y = [a as f64 / nf, b as f64 / nf, c as f64 / nf];
                let y_uvw = t as f64 / nf;
                for (pi, signs) in PATTERNS.iter().enumerate() {
                    let profile = TriangleProfile::new(*signs, y, y_uvw);
                    if opts.psd_region && !profile.is_feasible(true) {
                        continue;
                    }
                    let kinds = kinds_on_grid(signs, [a, b, c], n, &opts.rules);
                    let (cost, delta) = triangle_terms(kinds, y, y_uvw, c_alpha);
                    let val = delta - cost;
                    let entry = acc.cells.entry((pi, kinds)).or_insert_with(|| CellMin {
                        pattern: pattern_name(signs),
                        kinds,
                        points: 0,
                        min: f64::INFINITY,
                        argmin: profile,
                    });
                    entry.points += 1;
                    if val < entry.min {
                        entry.min = val;
                        entry.argmin = profile;
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// Degenerate pairs on the grid, evaluated directly and through the `(y, y, 1, y)` stand-in.
pub fn verify_degenerate(opts: &VerifyOptions) -> Result<VerifyAccumulator> {
    let n = opts.resolution()?;
    let c_alpha = BudgetSpec::new(opts.alpha)?.c_alpha();
    let mut acc = VerifyAccumulator::default();
    if !opts.degenerate {
        return Ok(acc);
    }
    for sign in [Sign::Plus, Sign::Minus] {
        let mut d = DegenerateMin {
            sign,
            points: 0,
            min: f64::INFINITY,
            argmin_y: 0.0,
            stand_in_min: f64::INFINITY,
            stand_in_excess: f64::NEG_INFINITY,
        };
        for k in 0..=n {
            let y = k as f64 / n as f64;
            let kind = EdgeKind::of(sign, (n - k) as f64 / n as f64, &opts.rules);
            let (cost, delta) = degenerate_terms(kind, y, c_alpha);
            let direct = delta - cost;
            let stand_in = TriangleProfile::degenerate_stand_in(sign, y);
            let kinds = [kind, kind, EdgeKind::of(Sign::Plus, 0.0, &opts.rules)];
            let (sc, sd) = triangle_terms(kinds, stand_in.y, stand_in.y_uvw, c_alpha);
            d.points += 1;
            if direct < d.min {
                d.min = direct;
                d.argmin_y = y;
            }
            d.stand_in_min = d.stand_in_min.min(sd - sc);
            d.stand_in_excess = d.stand_in_excess.max((sd - sc) - direct);
        }
        acc.degenerate.push(d);
    }
    Ok(acc)
}

/// Serial run over the whole grid.
pub fn verify_lemmas(opts: &VerifyOptions) -> Result<VerifyReport> {
    let n = opts.resolution()?;
    let mut acc = verify_degenerate(opts)?;
    for a in 0..=n {
        acc = acc.merge(verify_slice(opts, a)?);
    }
    Ok(acc.finish(opts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_at_156_on_coarse_grid() {
        let r = verify_lemmas(&VerifyOptions::new(1.56, RuleSet::alg3(), 0.05)).unwrap();
        assert!(r.passed(), "min {} at {:?}", r.min, r.argmin);
        assert!(r.cells.iter().all(|c| c.points > 0));
    }

    #[test]
    fn fails_at_140() {
        let r = verify_lemmas(&VerifyOptions::new(1.40, RuleSet::alg3(), 0.05)).unwrap();
        assert!(r.min < -VERIFY_TOL);
        assert!(matches!(r.argmin, Some(Profile::Triangle(_))));
    }

    #[test]
    fn degenerate_minus_at_four_thirds() {
        let mut o = VerifyOptions::new(4.0 / 3.0, RuleSet::alg3(), 0.01);
        o.triangles = false;
        let r = verify_lemmas(&o).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.points, 2 * 101);
    }

    #[test]
    fn stand_in_never_exceeds_direct_under_alg4() {
        let mut o = VerifyOptions::new(1.485, RuleSet::alg4(), 0.01);
        o.triangles = false;
        let r = verify_lemmas(&o).unwrap();
        for d in &r.degenerate {
            assert!(d.stand_in_excess <= VERIFY_TOL, "{d:?}");
        }
    }

    #[test]
    fn psd_region_adds_nothing_on_three_vertices() {
        let base = VerifyOptions::new(1.56, RuleSet::alg3(), 0.1);
        let mut psd = base.clone();
        psd.psd_region = true;
        let a = verify_lemmas(&base).unwrap();
        let b = verify_lemmas(&psd).unwrap();
        assert_eq!(b.points, a.points);
        assert_eq!(b.min, a.min);
    }

    #[test]
    fn bad_steps_rejected() {
        assert!(VerifyOptions::new(1.56, RuleSet::alg3(), 0.03).resolution().is_err());
        assert!(VerifyOptions::new(2.5, RuleSet::alg3(), 0.05).resolution().is_err());
        assert_eq!(VerifyOptions::new(1.56, RuleSet::alg3(), 0.02).resolution().unwrap(), 50);
    }
}
