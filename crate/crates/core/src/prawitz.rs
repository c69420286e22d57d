//! Rigorous lower bounds on `G̃(a, x) = inf P(X ≥ x)` over unit-variance
//! Rademacher sums with largest weight at most `a`, from the smoothed
//! characteristic-function inequality
//!
//! ```text
//! F(a,x,T,q) = 1/2 − ∫₀^q |k|·g(Tu,a) du − ∫_q^1 |k|·h(Tu,a) du − ∫₀^q k·exp(−(Tu)²/2) du
//! ```
//!
//! Each integral is bounded above panel by panel using interval enclosures
//! of the integrand, so the returned value never exceeds `F`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::jet::Jet;

/// Root of `exp(−θ²/2) + cos θ` on `[0, π]`, as a certified bracket
/// `[lo, hi]` with a point estimate inside it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaConstant {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ThetaConstant {
    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn bracket(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }
}

fn theta_residual(t: f64) -> Interval {
    let ti = Interval::point(t);
    (ti.sqr() * Interval::point(-0.5)).exp() + ti.cos()
}

/// Bisection on `[0, π]`. Stops once the bracket is no wider than
/// `tolerance` or the residual sign can no longer be certified.
pub fn solve_theta(tolerance: f64) -> Result<ThetaConstant> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParam(format!("tolerance must be positive, got {tolerance}")));
    }
    let (mut lo, mut hi) = (0.0f64, PI);
    debug_assert!(theta_residual(lo).lo > 0.0 && theta_residual(hi).hi < 0.0);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = theta_residual(mid);
        if r.lo > 0.0 {
            lo = mid;
        } else if r.hi < 0.0 {
            hi = mid;
        } else {
            break;
        }
    }
    // secant step between the bracket ends; stays inside the bracket
    let (r_lo, r_hi) = (theta_residual(lo).mid(), theta_residual(hi).mid());
    let value = if r_lo > r_hi { (lo + (hi - lo) * r_lo / (r_lo - r_hi)).clamp(lo, hi) } else { 0.5 * (lo + hi) };
    Ok(ThetaConstant { value, lo, hi })
}

/// Whether the residual changes sign across the bracket.
pub fn theta_bracket_certified(theta: &ThetaConstant) -> bool {
    theta_residual(theta.lo()).lo > 0.0 && theta_residual(theta.hi()).hi < 0.0
}

/// The bracket used by every bound in this module.
pub fn theta() -> ThetaConstant {
    static THETA: OnceLock<ThetaConstant> = OnceLock::new();
    *THETA.get_or_init(|| solve_theta(1e-12).expect("positive tolerance"))
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `k(u,x,T) = (1−u)·sin(πu + Tux)/sin(πu) + sin(Tux)/π`, continuous at
/// `u ∈ {0, 1}` (`1 + Tx/π` and `0`).
pub fn kernel_k(u: f64, x: f64, t: f64) -> f64 {
    let w = t * x;
    // sin(πu + wu) = sin(πu)cos(wu) + cos(πu)sin(wu)
    let q = if u <= 0.5 {
        (1.0 - u) * (w / PI) * sinc(w * u) / sinc(PI * u)
    } else {
        (w * u).sin() / (PI * sinc(PI * (1.0 - u)))
    };
    (1.0 - u) * (w * u).cos() + (PI * u).cos() * q + (w * u).sin() / PI
}

/// Enclosure of `k` over `u ∈ U` with `Tx ∈ W`.
pub fn kernel_enclosure(u: Interval, w: Interval) -> Interval {
    if u.lo < 0.5 && u.hi > 0.5 {
        let left = kernel_enclosure(Interval::new(u.lo, 0.5), w);
        let right = kernel_enclosure(Interval::new(0.5, u.hi), w);
        return left.hull(right);
    }
    let pi = Interval::pi();
    let one_minus_u = Interval::ONE - u;
    let wu = w * u;
    let (s, c) = (wu.sin(), wu.cos());
    let q = if u.hi <= 0.5 {
        one_minus_u * (w / pi) * wu.sinc() / (pi * u).sinc()
    } else {
        s / (pi * (pi * one_minus_u).sinc())
    };
    one_minus_u * c + (pi * u).cos() * q + s / pi
}

/// `g(v,a)`: `exp(−v²/2) − cos(av)^{1/a²}` for `av ≤ π/2`, else `exp(−v²/2) + 1`.
pub fn envelope_g(v: f64, a: f64) -> f64 {
    let e = (-v * v / 2.0).exp();
    let av = a * v;
    if av <= FRAC_PI_2 {
        e - av.cos().max(0.0).powf(1.0 / (a * a))
    } else {
        e + 1.0
    }
}

/// `h(v,a)`: `exp(−v²/2)` for `av ≤ θ`, `(−cos av)^{1/a²}` up to `π`, then 1.
/// Inside the θ bracket the larger branch is returned.
pub fn envelope_h(v: f64, a: f64) -> f64 {
    let th = theta();
    let av = a * v;
    let gauss = (-v * v / 2.0).exp();
    let neg_cos = || {
        let c = -av.cos();
        if c > 0.0 {
            (c.ln() / (a * a)).exp()
        } else {
            0.0
        }
    };
    if av > PI {
        1.0
    } else if av < th.lo() {
        gauss
    } else if av > th.hi() {
        neg_cos()
    } else {
        gauss.max(neg_cos())
    }
}

fn gauss_upper(v: Interval) -> f64 {
    (v.sqr() * Interval::point(-0.5)).exp().hi
}

fn inv_a_sq(a: f64) -> Interval {
    Interval::ONE / Interval::point(a).sqr()
}

/// Upper bound of `g(v, a)` over `v ∈ V`.
pub fn envelope_g_upper(v: Interval, a: f64) -> f64 {
    let av = v * Interval::point(a);
    let half_pi = Interval::new(FRAC_PI_2, FRAC_PI_2.next_up());
    let e = gauss_upper(v);
    if av.hi < half_pi.lo {
        let c = av.cos();
        let c = Interval::new(c.lo.max(0.0), c.hi.max(0.0));
        let p = c.powp(inv_a_sq(a));
        (Interval::point(e) - p).hi.max(0.0)
    } else {
        (Interval::point(e) + Interval::ONE).hi
    }
}

/// Upper bound of `h(v, a)` over `v ∈ V`, covering both branches wherever
/// the θ bracket leaves the split undecided.
pub fn envelope_h_upper(v: Interval, a: f64) -> f64 {
    let th = theta().bracket();
    let pi = Interval::pi();
    let av = v * Interval::point(a);
    let mut out = 0.0f64;
    if av.lo <= th.hi {
        out = out.max(gauss_upper(v));
    }
    if av.hi >= th.lo && av.lo <= pi.hi {
        let part = Interval::new(av.lo.max(th.lo), av.hi.min(pi.hi));
        let c = -part.cos();
        let c = Interval::new(c.lo.clamp(0.0, 1.0), c.hi.clamp(0.0, 1.0));
        out = out.max(c.powp(inv_a_sq(a)).hi);
    }
    if av.hi > pi.lo {
        out = out.max(1.0);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrawitzParams {
    /// Frequency cutoff `T > 0`.
    pub t: f64,
    /// Split point `q ∈ [0, 1]`.
    pub q: f64,
    /// Number `M` of uniform quadrature panels on `[0, 1]`.
    pub panels: usize,
}

impl PrawitzParams {
    pub fn new(t: f64, q: f64, panels: usize) -> Result<Self> {
        let p = PrawitzParams { t, q, panels };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParam(format!("T must be positive, got {}", self.t)));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::InvalidParam(format!("q must lie in [0, 1], got {}", self.q)));
        }
        if self.panels == 0 {
            return Err(Error::InvalidParam("at least one panel is required".into()));
        }
        Ok(())
    }
}

fn check_point(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::OutOfRange { what: "a", detail: format!("need 0 < a ≤ 1, got {a}") });
    }
    if !x.is_finite() {
        return Err(Error::OutOfRange { what: "x", detail: format!("x must be finite, got {x}") });
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Branch {
    First,
    Second,
    Third,
}

/// `∫_{u0}^{u1} f` bounded above by a midpoint Taylor expansion with a
/// second-derivative remainder; `None` when the remainder is unbounded.
fn taylor_upper(f: impl Fn(Jet) -> Jet, u0: f64, u1: f64) -> Option<f64> {
    let whole = f(Jet::variable(Interval::new(u0, u1)));
    if !whole.d2.is_finite() {
        return None;
    }
    let m = 0.5 * (u0 + u1);
    let at_mid = f(Jet::variable(Interval::point(m)));
    if !at_mid.is_finite() {
        return None;
    }
    let (a, b) = (Interval::point(u0), Interval::point(u1));
    let w = b - a;
    let dm = (a + b) * Interval::point(0.5) - Interval::point(m);
    // ∫(u − m)² du = w³/12 + w·dm²
    let second_moment = w * w.sqr() / Interval::point(12.0) + w * dm.sqr();
    let total = w * at_mid.v + at_mid.d1 * w * dm + Interval::point(0.5) * whole.d2 * second_moment;
    total.hi.is_finite().then_some(total.hi)
}

fn kernel_jet(u: Jet, w: Interval, upper_half: bool) -> Jet {
    let pi = Interval::pi();
    let one_minus_u = Jet::constant(Interval::ONE) - u;
    let wu = u.scale(w);
    let (s, c) = (wu.sin(), wu.cos());
    let q = if upper_half {
        s / one_minus_u.scale(pi).sinc().scale(pi)
    } else {
        one_minus_u * wu.sinc().scale(w / pi) / u.scale(pi).sinc()
    };
    one_minus_u * c + u.scale(pi).cos() * q + s.scale(Interval::ONE / pi)
}

/// Upper bounds of the two panel integrals over `[u0, u1]`:
/// `∫ (|k|g + k·e)` for the part below `q` and `∫ |k|h` above it.
///
/// Each is the smaller of a crude bound (width times the integrand's
/// supremum) and a Taylor bound, the latter available where the integrand
/// is smooth on the whole panel.
fn panel_bounds(a: f64, w: Interval, t: f64, u0: f64, u1: f64) -> (f64, f64) {
    let u = Interval::new(u0, u1);
    let v = u * Interval::point(t);
    let k = kernel_enclosure(u, w);
    let e = (v.sqr() * Interval::point(-0.5)).exp();
    let g = envelope_g_upper(v, a);
    let h = envelope_h_upper(v, a);
    let abs_k = k.abs().hi;
    let below = (Interval::point(abs_k) * Interval::point(g) + k * e).hi;
    let above = (Interval::point(abs_k) * Interval::point(h)).hi;
    let width = Interval::point(u1) - Interval::point(u0);
    let width = Interval::new(width.lo.max(0.0), width.hi);
    let mut crude_below = (Interval::point(below) * width).hi;
    let mut crude_above = (Interval::point(above) * width).hi;

    let sign = if k.lo > 0.0 {
        Interval::ONE
    } else if k.hi < 0.0 {
        -Interval::ONE
    } else {
        return (crude_below, crude_above);
    };
    if u0 < 0.5 && u1 > 0.5 {
        return (crude_below, crude_above);
    }
    let upper_half = u0 >= 0.5;
    let av = v * Interval::point(a);
    let half_pi = Interval::new(FRAC_PI_2, FRAC_PI_2.next_up());
    let th = theta().bracket();
    let pi = Interval::pi();
    let p = inv_a_sq(a);
    let ta = Interval::point(t) * Interval::point(a);
    let gauss = |u: Jet| u.scale(Interval::point(t)).sqr().scale(Interval::point(-0.5)).exp();

    let g_branch = if av.hi < half_pi.lo {
        Some(Branch::First)
    } else if av.lo > half_pi.hi {
        Some(Branch::Second)
    } else {
        None
    };
    if let Some(branch) = g_branch {
        let f = |u: Jet| {
            let kj = kernel_jet(u, w, upper_half);
            let e = gauss(u);
            let env = match branch {
                Branch::First => e - (u.scale(ta).cos().ln().scale(p)).exp(),
                _ => e + Jet::constant(Interval::ONE),
            };
            kj.scale(sign) * env + kj * e
        };
        if let Some(b) = taylor_upper(f, u0, u1) {
            crude_below = crude_below.min(b);
        }
    }
    let h_branch = if av.hi < th.lo {
        Some(Branch::First)
    } else if av.lo > th.hi && av.hi < pi.lo {
        Some(Branch::Second)
    } else if av.lo > pi.hi {
        Some(Branch::Third)
    } else {
        None
    };
    if let Some(branch) = h_branch {
        let f = |u: Jet| {
            let kj = kernel_jet(u, w, upper_half).scale(sign);
            match branch {
                Branch::First => kj * gauss(u),
                Branch::Second => kj * (-u.scale(ta).cos()).ln().scale(p).exp(),
                Branch::Third => kj,
            }
        };
        if let Some(b) = taylor_upper(f, u0, u1) {
            crude_above = crude_above.min(b);
        }
    }
    (crude_below, crude_above)
}

fn boundary(j: usize, m: usize) -> f64 {
    j as f64 / m as f64
}

/// Panel integral bounds for one `(a, x, T, M)`, with prefix sums over the
/// part below `q` and suffix sums over the part above.
#[derive(Clone, Debug)]
pub struct PanelTable {
    a: f64,
    w: Interval,
    t: f64,
    m: usize,
    prefix_below: Vec<f64>,
    suffix_above: Vec<f64>,
}

impl PanelTable {
    pub fn new(a: f64, x: f64, t: f64, m: usize) -> Self {
        let w = Interval::point(t) * Interval::point(x);
        let mut below = Vec::with_capacity(m);
        let mut above = Vec::with_capacity(m);
        for j in 0..m {
            let (b, h) = panel_bounds(a, w, t, boundary(j, m), boundary(j + 1, m));
            below.push(b);
            above.push(h);
        }
        let mut prefix_below = vec![0.0; m + 1];
        for j in 0..m {
            prefix_below[j + 1] = (prefix_below[j] + below[j]).next_up();
        }
        let mut suffix_above = vec![0.0; m + 1];
        for j in (0..m).rev() {
            suffix_above[j] = (suffix_above[j + 1] + above[j]).next_up();
        }
        PanelTable { a, w, t, m, prefix_below, suffix_above }
    }

    /// Certified lower bound on `F` at split point `q`.
    pub fn bound_at(&self, q: f64) -> f64 {
        let m = self.m;
        let j = ((q * m as f64).floor() as usize).min(m);
        let total = if boundary(j, m) == q {
            (self.prefix_below[j] + self.suffix_above[j]).next_up()
        } else {
            // q falls strictly inside panel j
            let (b, _) = panel_bounds(self.a, self.w, self.t, boundary(j, m), q);
            let (_, h) = panel_bounds(self.a, self.w, self.t, q, boundary(j + 1, m));
            let left = (self.prefix_below[j] + b).next_up();
            let right = (h + self.suffix_above[j + 1]).next_up();
            (left + right).next_up()
        };
        (0.5 - total).next_down()
    }
}

/// Certified lower bound on `F(a, x, T, q)`; may be negative.
pub fn prawitz_lower_bound(a: f64, x: f64, params: &PrawitzParams) -> Result<f64> {
    params.validate()?;
    check_point(a, x)?;
    Ok(PanelTable::new(a, x, params.t, params.panels).bound_at(params.q))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrawitzOptimum {
    /// Best bound, clamped to `[0, 1]`.
    pub value: f64,
    pub t: f64,
    pub q: f64,
}

/// Maximum of [`prawitz_lower_bound`] over `T_grid × q_grid`, clamped to `[0, 1]`.
pub fn optimize_prawitz(a: f64, x: f64, t_grid: &[f64], q_grid: &[f64], panels: usize) -> Result<PrawitzOptimum> {
    if t_grid.is_empty() || q_grid.is_empty() {
        return Err(Error::InvalidParam("T and q grids must be nonempty".into()));
    }
    for &t in t_grid {
        for &q in q_grid {
            PrawitzParams { t, q, panels }.validate()?;
        }
    }
    check_point(a, x)?;
    let per_t: Vec<(f64, f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let table = PanelTable::new(a, x, t, panels);
            q_grid.iter().fold((f64::NEG_INFINITY, t, q_grid[0]), |best, &q| {
                let v = table.bound_at(q);
                if v > best.0 {
                    (v, t, q)
                } else {
                    best
                }
            })
        })
        .collect();
    let best = per_t.into_iter().fold((f64::NEG_INFINITY, t_grid[0], q_grid[0]), |best, c| {
        if c.0 > best.0 {
            c
        } else {
            best
        }
    });
    Ok(PrawitzOptimum { value: best.0.clamp(0.0, 1.0), t: best.1, q: best.2 })
}

/// Grids and resolution used when seeding the DP table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrawitzConfig {
    /// `T` values are these multipliers divided by `max(a, a_floor)`.
    pub t_multipliers: Vec<f64>,
    pub a_floor: f64,
    pub q_grid: Vec<f64>,
    pub panels: usize,
}

impl Default for PrawitzConfig {
    fn default() -> Self {
        PrawitzConfig {
            t_multipliers: vec![1.0, 1.5, 2.0, 2.5, 3.0],
            a_floor: 0.05,
            q_grid: vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3],
            panels: 256,
        }
    }
}

impl PrawitzConfig {
    pub fn t_grid(&self, a: f64) -> Vec<f64> {
        let scale = a.max(self.a_floor);
        self.t_multipliers.iter().map(|m| m / scale).collect()
    }

    pub fn optimize(&self, a: f64, x: f64) -> Result<PrawitzOptimum> {
        optimize_prawitz(a, x, &self.t_grid(a), &self.q_grid, self.panels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_bracket() {
        let th = solve_theta(1e-4).unwrap();
        assert!((th.value - 1.778).abs() <= 1e-4);
        assert!(th.width() <= 1e-4 && th.bracket().contains(th.value));
        assert!(theta_bracket_certified(&th));
        let fine = solve_theta(1e-8).unwrap();
        assert!(theta_bracket_certified(&fine));
        assert!(fine.width() <= 1e-8);
        let r = (-fine.value * fine.value / 2.0).exp() + fine.value.cos();
        let lipschitz = 1.9 * (-1.7f64 * 1.7 / 2.0).exp() + 1.0;
        assert!(r.abs() <= lipschitz * 1e-8);
        assert!(solve_theta(0.0).is_err());
    }

    #[test]
    fn kernel_values() {
        for &(x, t) in &[(0.3, 2.0), (-1.2, 5.0), (2.5, 11.0)] {
            let w = t * x;
            assert!((kernel_k(0.0, x, t) - (1.0 + w / PI)).abs() < 1e-12);
            assert!(kernel_k(1.0, x, t).abs() < 1e-12);
            assert!((kernel_k(1e-6, x, t) - (1.0 + w / PI)).abs() < 1e-4);
            assert!(kernel_k(1.0 - 1e-6, x, t).abs() < 1e-4);
            for u in [0.1, 0.37, 0.5, 0.8] {
                let direct = (1.0 - u) * (PI * u + w * u).sin() / (PI * u).sin() + (w * u).sin() / PI;
                assert!((kernel_k(u, x, t) - direct).abs() < 1e-12);
            }
        }
        assert!((kernel_k(0.5, 0.0, 3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kernel_enclosure_contains_samples() {
        for &(x, t) in &[(0.3, 2.0), (-1.2, 5.0), (2.5, 11.0), (0.0, 1.0)] {
            let w = Interval::point(t) * Interval::point(x);
            for j in 0..50 {
                let (u0, u1) = (j as f64 / 50.0, (j + 1) as f64 / 50.0);
                let k = kernel_enclosure(Interval::new(u0, u1), w);
                for s in 0..=10 {
                    let u = u0 + (u1 - u0) * s as f64 / 10.0;
                    assert!(k.contains(kernel_k(u, x, t)), "u={u} x={x} t={t}");
                }
            }
        }
    }

    #[test]
    fn envelope_values() {
        assert_eq!(envelope_g(0.0, 0.5), 0.0);
        assert_eq!(envelope_h(4.0, 1.0), 1.0);
        assert!((envelope_h(2.0, 1.0) - 0.4161468365).abs() < 1e-9);
    }

    #[test]
    fn branch_continuity() {
        let th = theta();
        for a in [0.1, 0.3, 0.7, 1.0] {
            // h at θ: both branches agree up to the bracket width
            let left = envelope_h((th.lo() - 1e-12) / a, a);
            let right = envelope_h((th.hi() + 1e-12) / a, a);
            let lip = 2.0 / (a * a) + 2.0 / a;
            assert!((left - right).abs() <= lip * (th.width() + 1e-11), "a={a}");
            // h at π
            let below = envelope_h((PI - 1e-12) / a, a);
            assert!((below - 1.0).abs() < 1e-9);
            // g jumps up by one across π/2; the right side dominates
            let gl = envelope_g(FRAC_PI_2 / a, a);
            let gr = envelope_g(FRAC_PI_2.next_up() / a, a);
            assert!(gr >= gl);
        }
    }

    #[test]
    fn single_point_grid_matches_bound() {
        let p = PrawitzParams::new(3.0, 0.5, 200).unwrap();
        let direct = prawitz_lower_bound(0.2, 0.3, &p).unwrap();
        let opt = optimize_prawitz(0.2, 0.3, &[3.0], &[0.5], 200).unwrap();
        assert_eq!(opt.value, direct.clamp(0.0, 1.0));
        // off-grid q goes through the split-panel path
        let p = PrawitzParams::new(3.0, 0.123, 200).unwrap();
        let direct = prawitz_lower_bound(0.2, 0.3, &p).unwrap();
        let opt = optimize_prawitz(0.2, 0.3, &[3.0], &[0.123], 200).unwrap();
        assert_eq!(opt.value, direct.clamp(0.0, 1.0));
    }

    #[test]
    fn grid_superset_dominates() {
        let small = optimize_prawitz(0.3, 0.5, &[2.0, 4.0], &[0.3, 0.5], 100).unwrap();
        let large = optimize_prawitz(0.3, 0.5, &[1.0, 2.0, 4.0, 6.0], &[0.2, 0.3, 0.5, 0.7], 100).unwrap();
        assert!(large.value >= small.value);
    }

    #[test]
    fn invalid_inputs() {
        assert!(PrawitzParams::new(0.0, 0.5, 10).is_err());
        assert!(PrawitzParams::new(1.0, 1.5, 10).is_err());
        assert!(PrawitzParams::new(1.0, 0.5, 0).is_err());
        assert!(optimize_prawitz(0.5, 0.0, &[], &[0.5], 10).is_err());
        let p = PrawitzParams::new(1.0, 0.5, 10).unwrap();
        assert!(prawitz_lower_bound(0.0, 0.0, &p).is_err());
        assert!(prawitz_lower_bound(1.5, 0.0, &p).is_err());
    }
}
