//! Closed floating-point intervals with outward rounding.
//!
//! Every operation widens its result by at least one ulp on each side, so
//! the true real-valued result is always enclosed. Library transcendentals
//! are trusted to within one ulp and widened by two.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[inline]
fn down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn up(x: f64) -> f64 {
    x.next_up()
}

#[inline]
fn down2(x: f64) -> f64 {
    x.next_down().next_down()
}

#[inline]
fn up2(x: f64) -> f64 {
    x.next_up().next_up()
}

impl Interval {
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Enclosure of π.
    pub fn pi() -> Self {
        Interval { lo: PI, hi: up(PI) }
    }

    /// Enclosure of `n / d`.
    pub fn ratio(n: f64, d: f64) -> Self {
        Interval::point(n) / Interval::point(d)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn max(self, other: Interval) -> Interval {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn min(self, other: Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }

    /// Intersection, or `None` when empty.
    pub fn meet(self, other: Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval { lo: 0.0, hi: (-self.lo).max(self.hi) }
        }
    }

    pub fn sqr(self) -> Interval {
        let a = self.abs();
        Interval { lo: down(a.lo * a.lo).max(0.0), hi: up(a.hi * a.hi) }
    }

    /// Square root, with the negative part of the argument discarded.
    pub fn sqrt(self) -> Interval {
        let lo = if self.lo <= 0.0 { 0.0 } else { down(self.lo.sqrt()).max(0.0) };
        let hi = if self.hi <= 0.0 { 0.0 } else { up(self.hi.sqrt()) };
        Interval { lo, hi }
    }

    pub fn exp(self) -> Interval {
        let lo = if self.lo == f64::NEG_INFINITY { 0.0 } else { down2(self.lo.exp()).max(0.0) };
        Interval { lo, hi: up2(self.hi.exp()) }
    }

    /// Natural logarithm; non-positive parts map to −∞.
    pub fn ln(self) -> Interval {
        let lo = if self.lo <= 0.0 { f64::NEG_INFINITY } else { down2(self.lo.ln()) };
        let hi = if self.hi <= 0.0 { f64::NEG_INFINITY } else { up2(self.hi.ln()) };
        Interval { lo, hi }
    }

    /// `self^p` for `self ⊂ [0, ∞)` and `p > 0`, via `exp(p·ln self)`.
    pub fn powp(self, p: Interval) -> Interval {
        debug_assert!(p.lo > 0.0);
        let base = Interval { lo: self.lo.max(0.0), hi: self.hi.max(0.0) };
        if base.hi == 0.0 {
            return Interval::ZERO;
        }
        let l = base.ln();
        // ln ≤ 0 part pairs with the larger exponent for the lower end
        let e = l * p;
        let r = e.exp();
        if base.lo == 0.0 {
            Interval { lo: 0.0, hi: r.hi }
        } else {
            r
        }
    }

    pub fn sin(self) -> Interval {
        periodic(self, f64::sin, FRAC_PI_2)
    }

    pub fn cos(self) -> Interval {
        periodic(self, f64::cos, 0.0)
    }

    /// `sin(x)/x` with the removable singularity filled in.
    pub fn sinc(self) -> Interval {
        let a = self.abs();
        // sinc is even and decreasing on [0, π]
        let inner_hi = a.hi.min(PI);
        let mut out: Option<Interval> = None;
        if a.lo <= PI {
            let top = sinc_point(a.lo);
            let bottom = sinc_point(inner_hi);
            out = Some(Interval { lo: bottom.lo, hi: top.hi });
        }
        if a.hi > PI {
            let outer = Interval { lo: a.lo.max(PI), hi: a.hi };
            let r = outer.sin() / outer;
            out = Some(match out {
                Some(o) => o.hull(r),
                None => r,
            });
        }
        let r = out.unwrap_or(Interval::ENTIRE);
        Interval { lo: r.lo.max(-1.0), hi: r.hi.min(1.0) }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

/// Enclosure of `sinc(x)` at a single point `x ≥ 0`.
fn sinc_point(x: f64) -> Interval {
    if x < 1e-4 {
        // 1 − x²/6 ≤ sinc x ≤ 1 − x²/6 + x⁴/120
        let x2 = Interval::point(x).sqr();
        let base = Interval::ONE - x2 / Interval::point(6.0);
        let extra = x2.sqr() / Interval::point(120.0);
        Interval { lo: base.lo, hi: (base + extra).hi.min(1.0) }
    } else {
        let xi = Interval::point(x);
        xi.sin() / xi
    }
}

/// Range of `f ∈ {sin, cos}` over `x`, where `f` peaks at `peak + 2πk` and
/// bottoms at `peak + π + 2πk`.
fn periodic(x: Interval, f: fn(f64) -> f64, peak: f64) -> Interval {
    if !x.is_finite() || x.width() >= 2.0 * PI {
        return Interval { lo: -1.0, hi: 1.0 };
    }
    let a = f(x.lo);
    let b = f(x.hi);
    let mut lo = down2(a.min(b));
    let mut hi = up2(a.max(b));
    // slack absorbs rounding in locating the extrema
    let slack = 1e-12 * (1.0 + x.lo.abs().max(x.hi.abs()));
    let two_pi = 2.0 * PI;
    let contains_extremum = |offset: f64| {
        let k = ((x.lo - slack - offset) / two_pi).ceil();
        offset + k * two_pi <= x.hi + slack
    };
    if contains_extremum(peak) {
        hi = 1.0;
    }
    if contains_extremum(peak + PI) {
        lo = -1.0;
    }
    Interval { lo: lo.max(-1.0), hi: hi.min(1.0) }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval { lo: down(self.lo - o.hi), hi: up(self.hi - o.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

fn mul_nan_safe(a: f64, b: f64) -> f64 {
    // 0·∞ inside interval products is 0
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [
            mul_nan_safe(self.lo, o.lo),
            mul_nan_safe(self.lo, o.hi),
            mul_nan_safe(self.hi, o.lo),
            mul_nan_safe(self.hi, o.hi),
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: down(lo), hi: up(hi) }
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, o: Interval) -> Interval {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return Interval::ENTIRE;
        }
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: down(lo), hi: up(hi) }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

/// Sum of non-negative upper bounds with upward rounding.
pub fn sum_up(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| up(acc + v))
}
