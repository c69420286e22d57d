//! Second-order Taylor jets over intervals: a value together with
//! enclosures of its first two derivatives in one variable.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::interval::Interval;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: Interval,
    pub d1: Interval,
    pub d2: Interval,
}

impl Jet {
    pub fn constant(v: Interval) -> Jet {
        Jet { v, d1: Interval::ZERO, d2: Interval::ZERO }
    }

    /// The independent variable ranging over `v`.
    pub fn variable(v: Interval) -> Jet {
        Jet { v, d1: Interval::ONE, d2: Interval::ZERO }
    }

    /// `f ∘ self` given enclosures of `f`, `f'`, `f''` at `self.v`.
    fn chain(self, f: Interval, f1: Interval, f2: Interval) -> Jet {
        Jet { v: f, d1: f1 * self.d1, d2: f2 * self.d1.sqr() + f1 * self.d2 }
    }

    pub fn scale(self, c: Interval) -> Jet {
        Jet { v: self.v * c, d1: self.d1 * c, d2: self.d2 * c }
    }

    pub fn sin(self) -> Jet {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Jet {
        let r = Interval::ONE / self.v;
        self.chain(self.v.ln(), r, -r.sqr())
    }

    pub fn sqr(self) -> Jet {
        self * self
    }

    pub fn recip(self) -> Jet {
        let r = Interval::ONE / self.v;
        let r2 = r.sqr();
        self.chain(r, -r2, Interval::point(2.0) * r2 * r)
    }

    pub fn sinc(self) -> Jet {
        let (f, f1, f2) = sinc_derivatives(self.v);
        self.chain(f, f1, f2)
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

fn sinc_series(z: Interval) -> (Interval, Interval, Interval) {
    // alternating series with decreasing terms on |z| ≤ 1
    let third = Interval::ONE / Interval::point(3.0);
    let z2 = z.sqr();
    let d1a = -(z * third);
    let d1b = d1a + z * z2 / Interval::point(30.0);
    let d2a = -third;
    let d2b = d2a + z2 / Interval::point(10.0);
    (z.sinc(), d1a.hull(d1b), d2a.hull(d2b))
}

fn sinc_closed(z: Interval) -> (Interval, Interval, Interval) {
    let s = z.sinc();
    let d1 = (z.cos() - s) / z;
    let d2 = -s - Interval::point(2.0) * d1 / z;
    (s, d1, d2)
}

/// `sinc`, `sinc'`, `sinc''` over `z`.
pub fn sinc_derivatives(z: Interval) -> (Interval, Interval, Interval) {
    let mut out: Option<(Interval, Interval, Interval)> = None;
    let mut join = |p: (Interval, Interval, Interval)| {
        out = Some(match out {
            None => p,
            Some(o) => (o.0.hull(p.0), o.1.hull(p.1), o.2.hull(p.2)),
        });
    };
    if let Some(mid) = z.meet(Interval::new(-1.0, 1.0)) {
        join(sinc_series(mid));
    }
    if z.hi > 1.0 {
        join(sinc_closed(Interval::new(z.lo.max(1.0), z.hi)));
    }
    if z.lo < -1.0 {
        join(sinc_closed(Interval::new(z.lo, z.hi.min(-1.0))));
    }
    out.unwrap_or((Interval::ENTIRE, Interval::ENTIRE, Interval::ENTIRE))
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + Interval::point(2.0) * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64, f64) {
        let h = 1e-4;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (f(x), d1, d2)
    }

    fn widen(i: Interval, tol: f64) -> Interval {
        Interval::new(i.lo - tol, i.hi + tol)
    }

    #[test]
    fn sinc_derivatives_match_differences() {
        let sinc = |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x };
        for x in [-4.0, -1.0, -0.3, 0.0, 0.2, 0.99, 1.0, 2.5, 7.0] {
            let (v, d1, d2) = sinc_derivatives(Interval::point(x));
            let (nv, n1, n2) = numeric(sinc, x);
            assert!(widen(v, 1e-12).contains(nv), "x={x}");
            assert!(widen(d1, 1e-6).contains(n1), "x={x}: {d1} vs {n1}");
            assert!(widen(d2, 1e-4).contains(n2), "x={x}: {d2} vs {n2}");
        }
    }

    #[test]
    fn composite_derivatives() {
        // f(u) = exp(-u²/2)·cos(3u)/(1+u)
        let f = |u: f64| (-u * u / 2.0).exp() * (3.0 * u).cos() / (1.0 + u);
        for u in [0.0, 0.3, 0.8] {
            let x = Jet::variable(Interval::point(u));
            let j = (x.sqr().scale(Interval::point(-0.5))).exp() * x.scale(Interval::point(3.0)).cos()
                / (Jet::constant(Interval::ONE) + x);
            let (nv, n1, n2) = numeric(f, u);
            assert!(widen(j.v, 1e-12).contains(nv));
            assert!(widen(j.d1, 1e-6).contains(n1));
            assert!(widen(j.d2, 1e-4).contains(n2));
        }
    }
}
