//! Certifying `Σ_{i∈I} λᵢaᵢ < s` from counts of sign patterns.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::constraint::LinearConstraint;
use crate::error::{Error, Result};
use crate::surd::Surd;

use super::probs::SignLattice;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallSumCert {
    #[serde(serialize_with = "crate::certs::report::display_all")]
    pub c: Vec<Surd>,
    /// Zero-based indices of `I` with their signs.
    pub lambda: Vec<(usize, i8)>,
    #[serde(serialize_with = "crate::certs::report::display")]
    pub s: Surd,
    #[serde(serialize_with = "crate::certs::report::display")]
    pub p: BigRational,
    #[serde(serialize_with = "crate::certs::report::display")]
    pub delta: BigRational,
    pub size_s: u64,
    pub size_r: u64,
    pub size_t: u64,
    /// Gap from `s` to the smallest signed sum above it.
    #[serde(serialize_with = "crate::certs::report::display")]
    pub d: Surd,
    /// `min(|S| − |T|, |R|)/2 + |T|`
    #[serde(serialize_with = "crate::certs::report::display")]
    pub lhs: BigRational,
    /// `2ᵏp`
    #[serde(serialize_with = "crate::certs::report::display")]
    pub rhs: BigRational,
    pub delta_ok: bool,
    pub certified: bool,
}

impl SmallSumCert {
    /// The certified constraint, if any.
    pub fn constraint(&self) -> Option<LinearConstraint> {
        if !self.certified {
            return None;
        }
        let len = self.lambda.iter().map(|&(i, _)| i + 1).max().unwrap_or(0);
        let mut coeffs = vec![0i8; len];
        for &(i, l) in &self.lambda {
            coeffs[i] = l;
        }
        Some(LinearConstraint::new(coeffs, self.s.clone(), true, "small-sum"))
    }
}

/// Enumerates `S`, `R`, `T` over `{−1,+1}ᵏ` and checks
/// `δ ≤ d/k` and `min(|S| − |T|, |R|)/2 + |T| ≥ 2ᵏp`.
pub fn small_sum_certificate(
    c: &[Surd],
    lambda: &[(usize, i8)],
    s: &Surd,
    p: &BigRational,
    delta: &BigRational,
) -> Result<SmallSumCert> {
    let k = c.len();
    if lambda.is_empty() {
        return Err(Error::InvalidParam("index set is empty".into()));
    }
    for &(i, l) in lambda {
        if i >= k || (l != 1 && l != -1) {
            return Err(Error::InvalidParam(format!("bad index/sign ({}, {l})", i + 1)));
        }
    }
    let mut sum = Surd::zero();
    for &(i, l) in lambda {
        sum = sum.try_add(&c[i].mul_rational(&BigRational::from_integer(l.into())))?;
    }
    if sum != *s {
        return Err(Error::Precondition(format!("signed sum over I is {sum}, not s = {s}")));
    }
    let lat = SignLattice::new(c)?;
    let s_u = lat.units(s)?;
    let (mut size_s, mut size_r, mut size_t) = (0u64, 0u64, 0u64);
    let mut min_above: Option<i128> = None;
    for mask in lat.patterns() {
        let v = BigRational::from_integer(lat.sum(mask).into());
        match v.cmp(&s_u) {
            Ordering::Equal => {
                size_s += 1;
                let on_r = lambda.iter().all(|&(i, l)| (mask >> i & 1 == 1) == (l == 1));
                size_r += u64::from(on_r);
            }
            Ordering::Greater => {
                size_t += 1;
                let n = lat.sum(mask);
                min_above = Some(min_above.map_or(n, |m| m.min(n)));
            }
            Ordering::Less => {}
        }
    }
    if size_s < size_t {
        return Err(Error::Precondition(format!("|S| = {size_s} is below |T| = {size_t}")));
    }
    // d in the units of s: (min_T − s_u)/L·√m, rebuilt through the lattice scale
    let d = match min_above {
        Some(n) => lattice_value(&lat, c, n)?.try_sub(s)?,
        None => Surd::from_integer(i64::MAX),
    };
    let kq = BigRational::from_integer(BigInt::from(k));
    let delta_ok = d.mul_rational(&kq.recip()).cmp_rational(delta) != Ordering::Less;
    let lhs = BigRational::new(BigInt::from(size_r.min(size_s - size_t)), 2.into()) + BigRational::from_integer(size_t.into());
    let rhs = BigRational::from_integer(BigInt::from(1u64) << k) * p;
    let certified = delta_ok && lhs >= rhs;
    Ok(SmallSumCert {
        c: c.to_vec(),
        lambda: lambda.to_vec(),
        s: s.clone(),
        p: p.clone(),
        delta: delta.clone(),
        size_s,
        size_r,
        size_t,
        d,
        lhs,
        rhs,
        delta_ok,
        certified,
    })
}

/// The exact value of lattice sum `n`, found by rescaling the leading weight.
fn lattice_value(lat: &SignLattice, c: &[Surd], n: i128) -> Result<Surd> {
    let (idx, unit) = lat
        .ints
        .iter()
        .enumerate()
        .find(|(_, v)| **v != 0)
        .ok_or_else(|| Error::Precondition("all weights are zero".into()))?;
    Ok(c[idx].mul_rational(&BigRational::new(n.into(), (*unit).into())))
}
