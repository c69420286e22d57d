//! Exact sign-pattern enumeration over structured weights.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::DEFAULT_ENUMERATION_CAP;
use crate::surd::{common_denominator, Surd};

/// Weights `cᵢ = nᵢ·u/L` for a common unit `u = √m` and integers `nᵢ`, so
/// signed sums can be enumerated in integers.
pub(crate) struct SignLattice {
    pub k: usize,
    radicand: BigInt,
    scale: BigRational,
    pub ints: Vec<i128>,
}

impl SignLattice {
    pub fn new(c: &[Surd]) -> Result<Self> {
        if c.len() > DEFAULT_ENUMERATION_CAP {
            return Err(Error::EnumerationCap { n: c.len(), cap: DEFAULT_ENUMERATION_CAP });
        }
        let radicand = common_radicand(c.iter())?;
        let coeffs: Vec<BigRational> = c.iter().map(|v| unit_coefficient(v, &radicand)).collect::<Result<_>>()?;
        let l = common_denominator(coeffs.iter());
        let scale = BigRational::from_integer(l);
        let ints = coeffs
            .iter()
            .map(|q| {
                let n = (q * &scale).to_integer();
                i128::try_from(n).map_err(|_| Error::Unsupported("weights too large for the lattice".into()))
            })
            .collect::<Result<_>>()?;
        Ok(SignLattice { k: c.len(), radicand, scale, ints })
    }

    /// `v` in lattice units; `v` must lie on the same ray `ℚ·√m`.
    pub fn units(&self, v: &Surd) -> Result<BigRational> {
        Ok(unit_coefficient(v, &self.radicand)? * &self.scale)
    }

    /// Signed sum for a pattern; bit `i` set means `ζᵢ = +1`.
    pub fn sum(&self, mask: u32) -> i128 {
        self.ints
            .iter()
            .enumerate()
            .map(|(i, &n)| if mask >> i & 1 == 1 { n } else { -n })
            .sum()
    }

    pub fn patterns(&self) -> impl Iterator<Item = u32> {
        0..(1u32 << self.k)
    }

    /// Multiplicity of each signed sum.
    pub fn histogram(&self) -> BTreeMap<i128, u64> {
        let mut h = BTreeMap::new();
        for m in self.patterns() {
            *h.entry(self.sum(m)).or_insert(0) += 1;
        }
        h
    }

    pub fn total_patterns(&self) -> BigInt {
        BigInt::one() << self.k
    }
}

fn common_radicand<'a>(values: impl Iterator<Item = &'a Surd>) -> Result<BigInt> {
    let mut m: Option<BigInt> = None;
    for v in values {
        if !v.is_pure() {
            return Err(Error::Unsupported(format!("{v} is not a rational multiple of a square root")));
        }
        if v.is_rational() {
            continue;
        }
        match &m {
            None => m = Some(v.radicand().clone()),
            Some(r) if r == v.radicand() => {}
            Some(r) => return Err(Error::Unsupported(format!("weights mix sqrt({r}) and sqrt({})", v.radicand()))),
        }
    }
    Ok(m.unwrap_or_else(BigInt::one))
}

/// `q` with `v = q·√m`.
fn unit_coefficient(v: &Surd, m: &BigInt) -> Result<BigRational> {
    if v.is_zero() {
        return Ok(BigRational::zero());
    }
    if m.is_one() {
        return v.as_rational().cloned().ok_or_else(|| Error::Unsupported(format!("{v} is irrational")));
    }
    if v.rational_part().is_zero() && v.radicand() == m {
        return Ok(v.surd_coeff().clone());
    }
    Err(Error::Unsupported(format!("{v} is not a rational multiple of sqrt({m})")))
}

/// `p_r = P(Y ∈ [s + rd − γ, s + rd + γ])` for `Y = Σ cᵢεᵢ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalProbs {
    /// `r ↦ p_r` for every offset that carries mass.
    #[serde(serialize_with = "serialize_offsets")]
    pub by_offset: BTreeMap<i64, BigRational>,
    #[serde(serialize_with = "crate::certs::report::display")]
    pub p_minus1: BigRational,
    #[serde(serialize_with = "crate::certs::report::display")]
    pub p0: BigRational,
    #[serde(serialize_with = "crate::certs::report::display")]
    pub p1: BigRational,
    /// `Σ_{r≥2} p_r`
    #[serde(serialize_with = "crate::certs::report::display")]
    pub t: BigRational,
}

fn serialize_offsets<S: serde::Serializer>(m: &BTreeMap<i64, BigRational>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &v.to_string())?;
    }
    map.end()
}

impl IntervalProbs {
    pub fn p(&self, r: i64) -> BigRational {
        self.by_offset.get(&r).cloned().unwrap_or_else(BigRational::zero)
    }
}

/// Exact interval probabilities for the structured sum.
///
/// With `gamma = Some(γ)`, checks that `γ < d/2` and that `2γ` is below the
/// gap between distinct signed sums, so the perturbed sum stays within `γ`
/// of its lattice value and the intervals see exactly the lattice points
/// `s + rd`. `None` treats `γ` as an arbitrarily small positive number.
pub fn structured_interval_probs(c: &[Surd], s: &Surd, d: &Surd, gamma: Option<&Surd>) -> Result<IntervalProbs> {
    if !d.is_positive() {
        return Err(Error::Precondition(format!("spacing d = {d} must be positive")));
    }
    let lat = SignLattice::new(c)?;
    let s_u = lat.units(s)?;
    let d_u = lat.units(d)?;
    let hist = lat.histogram();

    if let Some(g) = gamma {
        if !g.is_positive() {
            return Err(Error::Precondition(format!("gamma = {g} must be positive")));
        }
        let half_d = d.mul_rational(&BigRational::new(1.into(), 2.into()));
        if g.try_cmp(&half_d)? != std::cmp::Ordering::Less {
            return Err(Error::Precondition(format!("gamma = {g} is not below d/2 = {half_d}")));
        }
        let gap = hist.keys().zip(hist.keys().skip(1)).map(|(a, b)| b - a).min();
        if let Some(gap) = gap {
            let gap_surd = if lat.radicand.is_one() {
                Surd::from_rational(BigRational::new(gap.into(), lat.scale.to_integer()))
            } else {
                Surd::scaled_sqrt(
                    &BigRational::new(gap.into(), lat.scale.to_integer()),
                    &BigRational::from_integer(lat.radicand.clone()),
                )?
            };
            let two_g = g.mul_rational(&BigRational::from_integer(2.into()));
            if two_g.try_cmp(&gap_surd)? != std::cmp::Ordering::Less {
                return Err(Error::Precondition(format!(
                    "intervals overlap: 2·gamma = {two_g} is not below the lattice gap {gap_surd}"
                )));
            }
        }
    }

    let total = BigRational::from_integer(lat.total_patterns());
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for (&v, &n) in &hist {
        let r = (BigRational::from_integer(v.into()) - &s_u) / &d_u;
        if r.is_integer() {
            let r = r.to_integer();
            let r = i64::try_from(r).map_err(|_| Error::Unsupported("offset out of range".into()))?;
            *counts.entry(r).or_insert(0) += n;
        }
    }
    let by_offset: BTreeMap<i64, BigRational> =
        counts.into_iter().map(|(r, n)| (r, BigRational::from_integer(n.into()) / &total)).collect();
    let get = |r: i64| by_offset.get(&r).cloned().unwrap_or_else(BigRational::zero);
    let t = by_offset.iter().filter(|(r, _)| **r >= 2).map(|(_, p)| p.clone()).sum();
    debug_assert!(!by_offset.values().any(|p| p.is_negative()));
    Ok(IntervalProbs { p_minus1: get(-1), p0: get(0), p1: get(1), t, by_offset })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(t: &str) -> Surd {
        Surd::parse(t).unwrap()
    }

    fn r(t: &str) -> BigRational {
        crate::surd::parse_rational(t).unwrap()
    }

    #[test]
    fn four_halves() {
        let c = vec![q("1/2"); 4];
        let p = structured_interval_probs(&c, &q("1"), &q("1"), None).unwrap();
        assert_eq!((p.p_minus1.clone(), p.p0.clone(), p.p1.clone(), p.t.clone()), (r("6/16"), r("4/16"), r("1/16"), r("0")));
    }

    #[test]
    fn ninths() {
        let c = vec![q("1/3"); 9];
        let p = structured_interval_probs(&c, &q("1"), &q("2/3"), Some(&q("0.0081"))).unwrap();
        assert_eq!(p.p_minus1, r("63/256"));
        assert_eq!(p.p0, r("21/128"));
        assert_eq!(p.p1, r("9/128"));
        assert_eq!(p.t, r("5/256"));
    }

    #[test]
    fn surd_weights() {
        let c = vec![q("1/sqrt(7)"); 7];
        let p = structured_interval_probs(&c, &q("1/sqrt(7)"), &q("2/sqrt(7)"), Some(&q("0.0132"))).unwrap();
        assert_eq!(p.p_minus1, r("35/128"));
        assert_eq!(p.t, r("8/128"));
    }

    #[test]
    fn overlapping_intervals_are_rejected() {
        let c = vec![q("1/2"); 4];
        assert!(matches!(
            structured_interval_probs(&c, &q("1"), &q("1"), Some(&q("1/2"))),
            Err(Error::Precondition(_))
        ));
        // gap is 1 for these weights, so γ = 0.6 < d/2 still overlaps neighbours
        assert!(structured_interval_probs(&c, &q("1"), &q("2"), Some(&q("0.6"))).is_err());
    }

    #[test]
    fn masses_sum_below_one() {
        let c: Vec<Surd> = ["1/2", "1/2", "1/4", "1/4", "1/4", "1/4", "1/4", "1/4", "1/4", "1/4"].iter().map(|t| q(t)).collect();
        let p = structured_interval_probs(&c, &q("1"), &q("1/2"), None).unwrap();
        let total: BigRational = p.by_offset.values().cloned().sum();
        assert!(total <= BigRational::one());
        assert_eq!(p.p_minus1, r("11/64"));
        assert_eq!(p.p0, r("127/1024"));
        assert_eq!(p.p1, r("9/128"));
        assert_eq!(p.t, r("39/1024"));
    }
}
