//! Scalar types the triangle formulas are generic over.

use core::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
}

/// Closed interval `[lo, hi]` with naive (not outward-rounded) arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "[{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    /// `max(|lo|, |hi|)`.
    pub fn mag(self) -> f64 {
        libm::fabs(self.lo).max(libm::fabs(self.hi))
    }

    pub fn contains(self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn from_candidates(c: [f64; 4]) -> Self {
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

impl Add for Interval {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Interval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }
}

impl Sub for Interval {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Interval { lo: self.lo - o.hi, hi: self.hi - o.lo }
    }
}

impl Neg for Interval {
    type Output = Self;
    fn neg(self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Interval::from_candidates([self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi])
    }
}

impl Div for Interval {
    type Output = Self;
    /// Requires a divisor bounded away from zero.
    fn div(self, o: Self) -> Self {
        assert!(o.lo > 0.0 || o.hi < 0.0, "interval division by a range containing 0");
        Interval::from_candidates([self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi])
    }
}

impl Real for Interval {
    fn cst(v: f64) -> Self {
        Interval::point(v)
    }
}

/// Value and gradient with respect to `D` seeded variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<R, const D: usize> {
    pub v: R,
    pub d: [R; D],
}

impl<R: Real, const D: usize> Dual<R, D> {
    /// The `i`-th independent variable with value `v`.
    pub fn var(v: R, i: usize) -> Self {
        let mut d = [R::cst(0.0); D];
        d[i] = R::cst(1.0);
        Dual { v, d }
    }
}

impl<R: Real, const D: usize> Add for Dual<R, D> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { v: self.v + o.v, d: core::array::from_fn(|i| self.d[i] + o.d[i]) }
    }
}

impl<R: Real, const D: usize> Sub for Dual<R, D> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { v: self.v - o.v, d: core::array::from_fn(|i| self.d[i] - o.d[i]) }
    }
}

impl<R: Real, const D: usize> Neg for Dual<R, D> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { v: -self.v, d: core::array::from_fn(|i| -self.d[i]) }
    }
}

impl<R: Real, const D: usize> Mul for Dual<R, D> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual { v: self.v * o.v, d: core::array::from_fn(|i| self.d[i] * o.v + self.v * o.d[i]) }
    }
}

impl<R: Real, const D: usize> Div for Dual<R, D> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v;
        Dual { v: q, d: core::array::from_fn(|i| (self.d[i] - q * o.d[i]) / o.v) }
    }
}

impl<R: Real, const D: usize> Real for Dual<R, D> {
    fn cst(v: f64) -> Self {
        Dual { v: R::cst(v), d: [R::cst(0.0); D] }
    }
}
