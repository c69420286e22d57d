//! The large-variance conclusion `P(X ≥ s) ≥ p₀/4 + 3p₁/4 + t`, valid when
//! `p₋₁ ≥ t`, `p₀ ≥ p₁` and `Var(Z) ≥ 8.17γ²`.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constraint::LinearConstraint;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::surd::{rational_of_f64, Surd};

use super::probs::{structured_interval_probs, IntervalProbs};

/// `8.17`, the variance factor; `8.17 ≥ 1/0.35²`.
pub fn variance_factor() -> BigRational {
    BigRational::new(817.into(), 100.into())
}

/// Exact check that `8.17·0.35² ≥ 1`.
pub fn variance_factor_is_valid() -> bool {
    variance_factor() * BigRational::new(35.into(), 100.into()).pow(2) >= BigRational::one()
}

/// `linear·Δ − quadratic·Δ²`, a lower bound on `Var(Z)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariancePoly {
    #[serde(serialize_with = "crate::certs::report::display")]
    pub linear: Surd,
    #[serde(serialize_with = "crate::certs::report::display")]
    pub quadratic: BigRational,
}

impl VariancePoly {
    pub fn new(linear: Surd, quadratic: BigRational) -> Self {
        VariancePoly { linear, quadratic }
    }

    pub fn eval(&self, delta: &BigRational) -> Surd {
        self.linear.mul_rational(delta).add_rational(&-(&self.quadratic * delta * delta))
    }

    pub fn enclosure(&self, delta: Interval) -> Interval {
        self.linear.enclosure() * delta - Interval::point(1.0) * self.quadratic_enclosure() * delta.sqr()
    }

    fn quadratic_enclosure(&self) -> Interval {
        crate::surd::rational_enclosure(&self.quadratic)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LargeVarianceCert {
    /// Structured weights `c₁..c_k`.
    pub weights: Vec<Surd>,
    pub s: Surd,
    pub d: Surd,
    /// `γ = gamma_coeff·Δ`
    pub gamma_coeff: BigRational,
    pub var_lower: VariancePoly,
    /// Largest `Δ` at which the quadratic inequality is claimed.
    pub delta_max: BigRational,
    /// Bound on `Δ` supplied by the search.
    pub delta_bound: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LargeVarianceOutcome {
    pub probs: IntervalProbs,
    /// `8.17·gamma_coeff²`
    pub gamma_factor: BigRational,
    /// `linear / (quadratic + 8.17·gamma_coeff²)`, the positive root of
    /// `var_lower(Δ) − 8.17γ²`.
    pub root: Surd,
    pub bound: BigRational,
}

/// Checks every hypothesis and returns `p₀/4 + 3p₁/4 + t`.
pub fn large_variance_conclusion(cert: &LargeVarianceCert) -> Result<LargeVarianceOutcome> {
    if !cert.delta_max.is_positive() {
        return Err(Error::Precondition("delta_max must be positive".into()));
    }
    if !cert.var_lower.linear.is_positive() {
        return Err(Error::Precondition("variance bound must grow with delta".into()));
    }
    let gamma_max = Surd::from_rational(&cert.gamma_coeff * &cert.delta_max);
    let probs = structured_interval_probs(&cert.weights, &cert.s, &cert.d, Some(&gamma_max))?;
    if probs.p_minus1 < probs.t {
        return Err(Error::Precondition(format!("p_-1 = {} is below t = {}", probs.p_minus1, probs.t)));
    }
    if probs.p0 < probs.p1 {
        return Err(Error::Precondition(format!("p_0 = {} is below p_1 = {}", probs.p0, probs.p1)));
    }
    let gamma_factor = variance_factor() * &cert.gamma_coeff * &cert.gamma_coeff;
    let denom = &cert.var_lower.quadratic + &gamma_factor;
    let root = cert.var_lower.linear.mul_rational(&denom.recip());
    // the difference Δ(linear − denom·Δ) is non-negative exactly on [0, root]
    if root.cmp_rational(&cert.delta_max) == Ordering::Less {
        return Err(Error::Precondition(format!(
            "variance inequality fails at delta = {} (root {root})",
            cert.delta_max
        )));
    }
    if cert.delta_bound > cert.delta_max {
        return Err(Error::Precondition(format!(
            "delta bound {} exceeds the verified range {}",
            cert.delta_bound, cert.delta_max
        )));
    }
    let four = BigRational::from_integer(4.into());
    let bound = &probs.p0 / &four + BigRational::from_integer(3.into()) * &probs.p1 / &four + &probs.t;
    Ok(LargeVarianceOutcome { probs, gamma_factor, root, bound })
}

/// `b²/k + kε²` bounding `Σaᵢ²` when `Σaᵢ ≤ b` and `|aᵢ − b/k| ≤ ε`.
pub fn sum_squares_bound(k: usize, b: &BigRational, eps: &BigRational) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be at least 1".into()));
    }
    let kr = BigRational::from_integer(k.into());
    Ok(b * b / &kr + kr * eps * eps)
}

/// How perturbations `δ` are drawn when validating a variance polynomial.
///
/// Each draw picks a scale `Δ`, a random sub-band of `[−Δ, Δ]` for the bulk
/// of the coordinates and pins one coordinate to `±Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampler {
    /// Bands anywhere in `[−Δ, Δ]`.
    Mixed,
    /// Bands inside `[−Δ, 0]`, pin at `−Δ`.
    NonPositive,
}

/// The admissible region for a variance polynomial.
pub struct VarianceRegion<'a> {
    pub weights: &'a [Surd],
    /// Constraints on `a = c + δ` (already certified).
    pub constraints: &'a [LinearConstraint],
    pub sampler: Sampler,
    /// Extra condition on `(δ, Δ)`.
    pub filter: Option<&'a (dyn Fn(&[f64], f64) -> bool + Sync)>,
    pub delta_bound: f64,
}

/// Result of validating `1 − Σaᵢ² ≥ poly(Δ)` on sampled admissible points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyValidation {
    pub accepted: usize,
    pub attempts: usize,
    /// First violating `δ`, if any.
    pub counterexample: Option<Vec<f64>>,
}

impl PolyValidation {
    pub fn passed(&self, min_accepted: usize) -> bool {
        self.counterexample.is_none() && self.accepted >= min_accepted
    }
}

/// Samples admissible perturbations and checks the variance bound on each
/// (and `Σ|δᵢ| ≤ gamma_coeff·Δ` when given). Points are exact doubles;
/// decisions use intervals, falling back to exact arithmetic when the
/// enclosure is ambiguous.
pub fn validate_variance_poly(
    region: &VarianceRegion<'_>,
    poly: &VariancePoly,
    gamma_coeff: Option<&BigRational>,
    samples: usize,
    seed: u64,
) -> PolyValidation {
    let k = region.weights.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c_enc: Vec<Interval> = region.weights.iter().map(Surd::enclosure).collect();
    let mut out = PolyValidation { accepted: 0, attempts: 0, counterexample: None };
    let max_attempts = samples * 400;
    while out.accepted < samples && out.attempts < max_attempts {
        out.attempts += 1;
        let big = region.delta_bound * rng.gen_range(0.001..=1.0f64);
        let top = match region.sampler {
            Sampler::Mixed => 1.0,
            Sampler::NonPositive => 0.0,
        };
        let mut band = [rng.gen_range(-1.0..=top), rng.gen_range(-1.0..=top)];
        band.sort_by(f64::total_cmp);
        let mut delta: Vec<f64> = (0..k).map(|_| big * rng.gen_range(band[0]..=band[1])).collect();
        let sign = if region.sampler == Sampler::Mixed && rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        delta[rng.gen_range(0..k)] = sign * big;
        // order weights within each block of equal structure
        sort_within_blocks(region.weights, &mut delta);
        let dmax = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if let Some(f) = region.filter {
            if !f(&delta, dmax) {
                continue;
            }
        }
        let a_enc: Vec<Interval> = c_enc.iter().zip(&delta).map(|(c, &d)| *c + Interval::point(d)).collect();
        match admissible(region, &a_enc, &delta) {
            Some(true) => {}
            _ => continue,
        }
        out.accepted += 1;
        if !bound_holds(region.weights, &a_enc, &delta, dmax, poly) {
            out.counterexample = Some(delta);
            return out;
        }
        if let Some(g) = gamma_coeff {
            let abs_sum = delta.iter().fold(Interval::ZERO, |s, d| s + Interval::point(d.abs()));
            let rhs = crate::surd::rational_enclosure(g) * Interval::point(dmax);
            if abs_sum.hi > rhs.lo && !exact_abs_sum_ok(&delta, dmax, g) {
                out.counterexample = Some(delta);
                return out;
            }
        }
    }
    out
}

fn sort_within_blocks(weights: &[Surd], delta: &mut [f64]) {
    let mut start = 0;
    while start < weights.len() {
        let mut end = start + 1;
        while end < weights.len() && weights[end] == weights[start] {
            end += 1;
        }
        delta[start..end].sort_by(|a, b| b.total_cmp(a));
        start = end;
    }
}

fn exact_point(weights: &[Surd], delta: &[f64]) -> Vec<Surd> {
    weights
        .iter()
        .zip(delta)
        .map(|(c, &d)| c.add_rational(&rational_of_f64(d).expect("finite")))
        .collect()
}

/// Ordering, `Σaᵢ² ≤ 1` and the constraints; `None` if undecidable.
fn admissible(region: &VarianceRegion<'_>, a: &[Interval], delta: &[f64]) -> Option<bool> {
    let exact = || exact_point(region.weights, delta);
    if a.windows(2).any(|w| w[1].lo > w[0].hi) {
        return Some(false);
    }
    if a.windows(2).any(|w| w[1].hi > w[0].lo) {
        let e = exact();
        for p in e.windows(2) {
            if p[1].try_cmp(&p[0]).ok()? == Ordering::Greater {
                return Some(false);
            }
        }
    }
    let sq = a.iter().fold(Interval::ZERO, |s, x| s + x.sqr());
    if sq.lo > 1.0 {
        return Some(false);
    }
    for c in region.constraints {
        let lhs = c
            .coeffs
            .iter()
            .zip(a)
            .fold(Interval::ZERO, |s, (&l, x)| s + Interval::point(f64::from(l)) * *x);
        let b = c.bound.enclosure();
        if lhs.lo > b.hi || (c.strict && lhs.lo >= b.hi) {
            return Some(false);
        }
        if lhs.hi >= b.lo {
            // ambiguous: decide exactly
            let e = exact();
            let mut sum = Surd::zero();
            for (&l, x) in c.coeffs.iter().zip(&e) {
                let term = x.mul_rational(&BigRational::from_integer(l.into()));
                sum = sum.try_add(&term).ok()?;
            }
            let ord = sum.try_cmp(&c.bound).ok()?;
            let ok = if c.strict { ord == Ordering::Less } else { ord != Ordering::Greater };
            if !ok {
                return Some(false);
            }
        }
    }
    if sq.hi > 1.0 {
        let e = exact();
        let mut s = Surd::zero();
        for x in &e {
            s = s.try_add(&x.try_mul(x).ok()?).ok()?;
        }
        if s.cmp_rational(&BigRational::one()) == Ordering::Greater {
            return Some(false);
        }
    }
    Some(true)
}

fn bound_holds(weights: &[Surd], a: &[Interval], delta: &[f64], dmax: f64, poly: &VariancePoly) -> bool {
    let var = Interval::ONE - a.iter().fold(Interval::ZERO, |s, x| s + x.sqr());
    let rhs = poly.enclosure(Interval::point(dmax));
    if var.lo >= rhs.hi {
        return true;
    }
    if var.hi < rhs.lo {
        return false;
    }
    let e = exact_point(weights, delta);
    let mut sq = Surd::zero();
    for x in &e {
        match x.try_mul(x).and_then(|y| sq.try_add(&y)) {
            Ok(v) => sq = v,
            Err(_) => return false,
        }
    }
    let var = sq.neg().add_rational(&BigRational::one());
    let rhs = poly.eval(&rational_of_f64(dmax).expect("finite"));
    var.try_cmp(&rhs).map(|o| o != Ordering::Less).unwrap_or(false)
}

fn exact_abs_sum_ok(delta: &[f64], dmax: f64, g: &BigRational) -> bool {
    let s: BigRational = delta.iter().map(|d| rational_of_f64(d.abs()).expect("finite")).sum();
    s <= g * rational_of_f64(dmax).expect("finite")
}
