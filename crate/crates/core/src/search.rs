//! Branch-and-prune over boxes of leading weights `a₁ ≥ … ≥ a_k` of a
//! unit-variance sum, discarding boxes on which `P(X ≥ s) ≥ p` is certified
//! by the table.
//!
//! For a box of depth `r`, the remaining weights form `Y` with variance
//! `σ² ∈ [1 − Σaᵢ₊², 1 − Σaᵢ₋²]` and largest weight at most `a_{r,+}`, so
//!
//! ```text
//! P(X ≥ s) ≥ 2⁻ʳ Σ_ζ D(a_{r,+}/σ₋, (s + h(ζ))/σ)
//! ```
//!
//! with `σ = σ₋` when `s + h(ζ) ≥ 0` and `σ = σ₊` otherwise.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::constraint::LinearConstraint;
use crate::dp::DPGrid;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::surd::{rational_enclosure, Surd};

/// Intervals `[aᵢ₋, aᵢ₊]` for the first `r` weights. Endpoints are exact
/// reals that happen to be doubles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightBox {
    pub intervals: Vec<Interval>,
}

impl WeightBox {
    pub fn new(intervals: Vec<Interval>) -> Self {
        WeightBox { intervals }
    }

    pub fn depth(&self) -> usize {
        self.intervals.len()
    }

    /// Enclosure of `Σ aᵢ₋²`.
    pub fn lower_square_sum(&self) -> Interval {
        self.intervals.iter().fold(Interval::ZERO, |acc, iv| acc + Interval::point(iv.lo).sqr())
    }

    /// Enclosure of `Σ aᵢ₊²`.
    pub fn upper_square_sum(&self) -> Interval {
        self.intervals.iter().fold(Interval::ZERO, |acc, iv| acc + Interval::point(iv.hi).sqr())
    }

    /// Whether `Σ aᵢ₋² > 1` certainly holds.
    pub fn variance_exceeded(&self) -> bool {
        self.lower_square_sum().lo > 1.0
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.intervals.iter().zip(point).all(|(iv, &x)| iv.lo <= x && x <= iv.hi)
    }
}

/// Enclosure of `max over the box of Σ ζᵢ zᵢ`: `aᵢ₊` where `ζᵢ = +1`,
/// `−aᵢ₋` where `ζᵢ = −1`.
pub fn h_max(signs: &[i8], b: &WeightBox) -> Result<Interval> {
    if signs.len() != b.depth() {
        return Err(Error::InvalidParam(format!("{} signs for a box of depth {}", signs.len(), b.depth())));
    }
    Ok(h_max_unchecked(signs.iter().map(|&z| z > 0), &b.intervals))
}

fn h_max_unchecked(plus: impl Iterator<Item = bool>, intervals: &[Interval]) -> Interval {
    plus.zip(intervals).fold(Interval::ZERO, |acc, (p, iv)| {
        if p {
            acc + Interval::point(iv.hi)
        } else {
            acc - Interval::point(iv.lo)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoxVerdict {
    Discard,
    Keep,
}

/// Threshold and target prepared for repeated tests.
#[derive(Clone, Copy, Debug)]
struct Target {
    s: Interval,
    /// Upper end of an enclosure of `p`.
    p_hi: f64,
}

impl Target {
    fn new(s: &Surd, p: &BigRational) -> Self {
        Target { s: s.enclosure(), p_hi: rational_enclosure(p).hi }
    }
}

/// Conservative lower bound on `P(X ≥ s)` over every sum whose leading
/// weights lie in the box.
pub fn box_lower_bound(b: &WeightBox, table: &DPGrid, s: &Surd) -> f64 {
    lower_bound_enc(b, table, s.enclosure())
}

fn lower_bound_enc(b: &WeightBox, table: &DPGrid, s: Interval) -> f64 {
    let r = b.depth();
    if r == 0 {
        return table.query_clamped(1.0, s.hi);
    }
    let var_minus = Interval::ONE - b.upper_square_sum();
    let var_plus = Interval::ONE - b.lower_square_sum();
    let sigma_plus = var_plus.max(Interval::ZERO).sqrt();
    let degenerate = !(var_minus.lo > 0.0);
    let sigma_minus = if degenerate { Interval::ZERO } else { var_minus.sqrt() };
    let a_arg = if degenerate { 1.0 } else { (Interval::point(b.intervals[r - 1].hi) / sigma_minus).hi.min(1.0) };

    let mut total = Interval::ZERO;
    for mask in 0u64..(1u64 << r) {
        let h = h_max_unchecked((0..r).map(|i| mask >> i & 1 == 1), &b.intervals);
        let t = s + h;
        let d = if degenerate {
            // only patterns whose shifted threshold is certainly negative count
            if t.hi < 0.0 {
                table.query_clamped(1.0, (t / sigma_plus).hi)
            } else {
                0.0
            }
        } else {
            let x = if t.lo >= 0.0 {
                (t / sigma_minus).hi
            } else if t.hi < 0.0 {
                (t / sigma_plus).hi
            } else {
                (t / sigma_minus).hi.max((t / sigma_plus).hi)
            };
            table.query_clamped(a_arg, x)
        };
        total = total + Interval::point(d);
    }
    (total * Interval::point(0.5f64.powi(r as i32))).lo.max(0.0)
}

/// Discards when the certified lower bound on `P(X ≥ s)` reaches `p`, or
/// when the box violates `Σaᵢ² ≤ 1`.
pub fn test_box(b: &WeightBox, table: &DPGrid, s: &Surd, p: &BigRational) -> BoxVerdict {
    test_box_enc(b, table, Target::new(s, p))
}

fn test_box_enc(b: &WeightBox, table: &DPGrid, target: Target) -> BoxVerdict {
    if b.variance_exceeded() || lower_bound_enc(b, table, target.s) >= target.p_hi {
        BoxVerdict::Discard
    } else {
        BoxVerdict::Keep
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    pub constraints: Vec<LinearConstraint>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<LinearConstraint>) -> Self {
        ConstraintSet { constraints }
    }

    pub fn push(&mut self, c: LinearConstraint) {
        self.constraints.push(c);
    }

    pub fn excludes(&self, b: &WeightBox) -> bool {
        self.constraints.iter().any(|c| c.excludes_box(&b.intervals))
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub s: Surd,
    pub p: BigRational,
    pub k: usize,
    /// Cells per coordinate in the first round.
    pub d: usize,
    /// Maximum number of boxes passed to the table test.
    pub budget: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub tested: u64,
    pub discarded: u64,
    pub excluded_by_constraint: u64,
    pub excluded_by_variance: u64,
    /// Boxes tested at each depth `1..=k`.
    pub tested_per_depth: Vec<u64>,
}

impl SearchStats {
    fn merge(&mut self, o: &SearchStats) {
        self.tested += o.tested;
        self.discarded += o.discarded;
        self.excluded_by_constraint += o.excluded_by_constraint;
        self.excluded_by_variance += o.excluded_by_variance;
        if self.tested_per_depth.len() < o.tested_per_depth.len() {
            self.tested_per_depth.resize(o.tested_per_depth.len(), 0);
        }
        for (a, b) in self.tested_per_depth.iter_mut().zip(&o.tested_per_depth) {
            *a += b;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    /// Depth-`k` boxes that were not discarded.
    pub survivors: Vec<WeightBox>,
    /// Boxes left untested when the budget ran out, at whatever depth.
    pub unresolved: Vec<WeightBox>,
    /// Coordinate-wise hull of survivors and unresolved boxes, the latter
    /// padded with the prior; `None` when nothing survives.
    pub envelope: Option<Vec<Interval>>,
    pub stats: SearchStats,
    pub conclusive: bool,
    pub d: usize,
}

impl SearchResult {
    /// Largest distance from `center` over the envelope.
    pub fn envelope_radius(&self, center: f64) -> Option<f64> {
        self.envelope
            .as_ref()
            .map(|e| e.iter().map(|iv| (iv.hi - center).max(center - iv.lo)).fold(0.0, f64::max))
    }

    /// Whether some survivor or unresolved box contains the prefix.
    pub fn retains(&self, prefix: &[f64]) -> bool {
        self.survivors.iter().chain(&self.unresolved).any(|b| b.contains(prefix))
    }
}

struct Ctx<'a> {
    table: &'a DPGrid,
    target: Target,
    constraints: &'a ConstraintSet,
    prior: &'a [Interval],
    k: usize,
    d: usize,
    budget: u64,
    spent: AtomicU64,
    exhausted: AtomicBool,
}

#[derive(Default)]
struct Partial {
    survivors: Vec<WeightBox>,
    unresolved: Vec<WeightBox>,
    stats: SearchStats,
}

impl Partial {
    fn absorb(&mut self, o: Partial) {
        self.survivors.extend(o.survivors);
        self.unresolved.extend(o.unresolved);
        self.stats.merge(&o.stats);
    }
}

impl Ctx<'_> {
    /// Candidate intervals for the next coordinate: cells of width `1/d`
    /// clipped to the prior and to the previous coordinate's upper end.
    fn children(&self, b: &WeightBox) -> Vec<WeightBox> {
        let r = b.depth();
        let upper = if r == 0 { 1.0 } else { b.intervals[r - 1].hi };
        let lo = self.prior[r].lo.max(0.0);
        let hi = self.prior[r].hi.min(upper).min(1.0);
        if lo > hi {
            return Vec::new();
        }
        let point_range = lo == hi;
        let d = self.d as f64;
        let mut out = Vec::new();
        for i in 0..self.d {
            let cell = Interval { lo: i as f64 / d, hi: (i + 1) as f64 / d };
            let c = Interval { lo: cell.lo.max(lo), hi: cell.hi.min(hi) };
            if c.lo > c.hi || (c.lo == c.hi && !point_range) {
                continue;
            }
            let mut intervals = b.intervals.clone();
            // a_j ≥ a_r for j < r, so the new lower end lifts earlier ones
            for iv in &mut intervals {
                iv.lo = iv.lo.max(c.lo);
            }
            intervals.push(c);
            out.push(WeightBox::new(intervals));
            if point_range {
                break;
            }
        }
        out
    }

    fn descend(&self, b: WeightBox) -> Partial {
        let mut part = Partial::default();
        part.stats.tested_per_depth = vec![0; self.k];
        if b.depth() == self.k {
            part.survivors.push(b);
            return part;
        }
        let results: Vec<Partial> = self
            .children(&b)
            .into_par_iter()
            .map(|child| {
                let mut p = Partial::default();
                p.stats.tested_per_depth = vec![0; self.k];
                if child.variance_exceeded() {
                    p.stats.excluded_by_variance += 1;
                    return p;
                }
                if self.constraints.excludes(&child) {
                    p.stats.excluded_by_constraint += 1;
                    return p;
                }
                if self.exhausted.load(AtomicOrdering::Relaxed)
                    || self.spent.fetch_add(1, AtomicOrdering::Relaxed) >= self.budget
                {
                    self.exhausted.store(true, AtomicOrdering::Relaxed);
                    p.unresolved.push(child);
                    return p;
                }
                p.stats.tested += 1;
                p.stats.tested_per_depth[child.depth() - 1] += 1;
                match test_box_enc(&child, self.table, self.target) {
                    BoxVerdict::Discard => {
                        p.stats.discarded += 1;
                        p
                    }
                    BoxVerdict::Keep => {
                        let deeper = self.descend(child);
                        p.absorb(deeper);
                        p
                    }
                }
            })
            .collect();
        for r in results {
            part.absorb(r);
        }
        part
    }
}

fn envelope(survivors: &[WeightBox], unresolved: &[WeightBox], prior: &[Interval], k: usize) -> Option<Vec<Interval>> {
    let mut env: Option<Vec<Interval>> = None;
    let padded = unresolved.iter().map(|b| {
        let mut iv = b.intervals.clone();
        iv.extend_from_slice(&prior[b.depth()..k]);
        iv
    });
    for iv in survivors.iter().map(|b| b.intervals.clone()).chain(padded) {
        env = Some(match env {
            None => iv,
            Some(e) => e.iter().zip(&iv).map(|(a, b)| a.hull(*b)).collect(),
        });
    }
    env
}

/// The unit prior `[0, 1]ᵏ`.
pub fn unit_prior(k: usize) -> Vec<Interval> {
    vec![Interval::UNIT; k]
}

/// Depth-first branch-and-prune to depth `k`.
pub fn search(
    config: &SearchConfig,
    table: &DPGrid,
    constraints: &ConstraintSet,
    prior: &[Interval],
) -> Result<SearchResult> {
    if config.k == 0 || config.d == 0 {
        return Err(Error::InvalidParam("search needs k ≥ 1 and d ≥ 1".into()));
    }
    if prior.len() != config.k {
        return Err(Error::InvalidParam(format!("prior has {} coordinates, k = {}", prior.len(), config.k)));
    }
    let ctx = Ctx {
        table,
        target: Target::new(&config.s, &config.p),
        constraints,
        prior,
        k: config.k,
        d: config.d,
        budget: config.budget,
        spent: AtomicU64::new(0),
        exhausted: AtomicBool::new(false),
    };
    let part = ctx.descend(WeightBox::new(Vec::new()));
    let env = envelope(&part.survivors, &part.unresolved, prior, config.k);
    Ok(SearchResult {
        conclusive: part.unresolved.is_empty(),
        envelope: env,
        survivors: part.survivors,
        unresolved: part.unresolved,
        stats: part.stats,
        d: config.d,
    })
}

/// Repeats the search with the previous envelope as prior and `d` doubled,
/// stopping early when nothing survives or the budget runs out. Returns the
/// result of every round.
pub fn feedback_iterate(
    config: &SearchConfig,
    table: &DPGrid,
    constraints: &ConstraintSet,
    prior: &[Interval],
    rounds: usize,
) -> Result<Vec<SearchResult>> {
    if rounds == 0 {
        return Err(Error::InvalidParam("rounds must be at least 1".into()));
    }
    let mut prior = prior.to_vec();
    let mut cfg = config.clone();
    let mut out = Vec::with_capacity(rounds);
    for round in 0..rounds {
        let res = search(&cfg, table, constraints, &prior)?;
        let next = res.envelope.clone();
        let stop = !res.conclusive || next.is_none();
        out.push(res);
        if stop || round + 1 == rounds {
            break;
        }
        prior = next.expect("checked above");
        cfg.d *= 2;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn h_max_examples() {
        let b = WeightBox::new(vec![Interval::new(0.4, 0.5), Interval::new(0.2, 0.3)]);
        let h = h_max(&[1, -1], &b).unwrap();
        assert!(h.contains(0.3));
        assert!(h_max(&[1, 1], &b).unwrap().contains(0.8));
        assert!(h_max(&[-1, -1], &b).unwrap().contains(-0.6));
        assert!(h_max(&[1], &b).is_err());
    }

    #[test]
    fn zero_target_discards_everything() {
        let table = DPGrid::constant(10, -30, 30, 0.0);
        let b = WeightBox::new(vec![Interval::new(0.4, 0.5)]);
        assert_eq!(test_box(&b, &table, &Surd::one(), &r(0, 1)), BoxVerdict::Discard);
        assert_eq!(test_box(&b, &table, &Surd::one(), &r(1, 100)), BoxVerdict::Keep);
    }

    #[test]
    fn excess_variance_discards() {
        let table = DPGrid::constant(10, -30, 30, 0.0);
        let b = WeightBox::new(vec![Interval::new(0.8, 0.9), Interval::new(0.7, 0.8)]);
        assert_eq!(test_box(&b, &table, &Surd::one(), &r(1, 2)), BoxVerdict::Discard);
    }

    #[test]
    fn contradictory_prior_gives_no_boxes() {
        let table = DPGrid::constant(10, -30, 30, 0.0);
        let cfg = SearchConfig { s: Surd::one(), p: r(7, 64), k: 2, d: 10, budget: 1000 };
        let prior = vec![Interval::new(0.0, 0.5), Interval::new(0.9, 1.0)];
        let res = search(&cfg, &table, &ConstraintSet::default(), &prior).unwrap();
        assert!(res.survivors.is_empty());
        assert!(res.conclusive);
        assert!(res.envelope.is_none());
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let table = DPGrid::constant(10, -30, 30, 0.0);
        let cfg = SearchConfig { s: Surd::one(), p: r(7, 64), k: 3, d: 4, budget: 5 };
        let res = search(&cfg, &table, &ConstraintSet::default(), &unit_prior(3)).unwrap();
        assert!(!res.conclusive);
        assert!(!res.unresolved.is_empty());
        assert_eq!(res.stats.tested, 5);
    }

    #[test]
    fn children_respect_ordering_and_lift_lower_ends() {
        let table = DPGrid::constant(10, -30, 30, 0.0);
        let cs = ConstraintSet::default();
        let prior = unit_prior(3);
        let ctx = Ctx {
            table: &table,
            target: Target::new(&Surd::one(), &r(1, 2)),
            constraints: &cs,
            prior: &prior,
            k: 3,
            d: 4,
            budget: 10,
            spent: AtomicU64::new(0),
            exhausted: AtomicBool::new(false),
        };
        let b = WeightBox::new(vec![Interval::new(0.25, 0.6)]);
        let kids = ctx.children(&b);
        assert_eq!(kids.len(), 3);
        assert_eq!(kids[2].intervals[1], Interval::new(0.5, 0.6));
        assert_eq!(kids[2].intervals[0], Interval::new(0.5, 0.6));
    }

    #[test]
    fn constraint_prunes_boxes() {
        let table = DPGrid::constant(10, -30, 30, 0.0);
        let c = LinearConstraint::new(vec![1], Surd::from_ratio(1, 2), true, "test");
        let cfg = SearchConfig { s: Surd::one(), p: r(7, 64), k: 1, d: 4, budget: 100 };
        let res = search(&cfg, &table, &ConstraintSet::new(vec![c]), &unit_prior(1)).unwrap();
        assert_eq!(res.stats.excluded_by_constraint, 2);
        assert_eq!(res.survivors.len(), 2);
        assert_eq!(res.envelope.unwrap()[0], Interval::new(0.0, 0.5));
    }
}
