//! Pairing sign patterns `A → B` whose sums average to at least `s`.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::DEFAULT_ENUMERATION_CAP;
use crate::surd::Surd;

/// A certified lower bound `Σ λᵢaᵢ ≥ bound` for one sign vector `λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignedSumBound {
    pub signs: Vec<i8>,
    #[serde(serialize_with = "crate::certs::report::display")]
    pub bound: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingCert {
    pub k: usize,
    pub size_a: u64,
    pub size_b: u64,
    pub bound_a: SignedSumBound,
    pub bound_b: SignedSumBound,
    #[serde(serialize_with = "crate::certs::report::display")]
    pub s: Surd,
    pub certified: bool,
    /// `|A|/2ᵏ`
    #[serde(serialize_with = "crate::certs::report::display")]
    pub probability: BigRational,
}

fn signs_of(mask: u32, k: usize) -> Vec<i8> {
    (0..k).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect()
}

/// For non-increasing non-negative `a`, `Σζᵢaᵢ ≥ Σλᵢaᵢ` holds for every such
/// `a` exactly when all prefix sums of `ζ − λ` are non-negative.
pub fn dominates(zeta: &[i8], lambda: &[i8]) -> bool {
    let mut acc = 0i32;
    for (z, l) in zeta.iter().zip(lambda) {
        acc += i32::from(*z) - i32::from(*l);
        if acc < 0 {
            return false;
        }
    }
    true
}

/// Checks the pairing argument for sign sets given as predicates.
///
/// Each bound must come with a sign vector that every member of its set
/// dominates, so the bound applies to the whole set. Certification needs
/// `|A| ≤ |B|` (any injection will do) and `bound_a + bound_b ≥ 2s`.
pub fn pairing_certificate(
    k: usize,
    in_a: &dyn Fn(&[i8]) -> bool,
    in_b: &dyn Fn(&[i8]) -> bool,
    bound_a: SignedSumBound,
    bound_b: SignedSumBound,
    s: &Surd,
) -> Result<PairingCert> {
    if k == 0 || k > DEFAULT_ENUMERATION_CAP {
        return Err(Error::EnumerationCap { n: k, cap: DEFAULT_ENUMERATION_CAP });
    }
    for b in [&bound_a, &bound_b] {
        if b.signs.len() != k {
            return Err(Error::InvalidParam(format!("bound needs {k} signs, got {}", b.signs.len())));
        }
    }
    let (mut size_a, mut size_b) = (0u64, 0u64);
    for mask in 0..(1u32 << k) {
        let z = signs_of(mask, k);
        let (a, b) = (in_a(&z), in_b(&z));
        if a && b {
            return Err(Error::Precondition(format!("sign sets share {z:?}")));
        }
        for (member, bound, name) in [(a, &bound_a, "A"), (b, &bound_b, "B")] {
            if member && !dominates(&z, &bound.signs) {
                return Err(Error::Precondition(format!(
                    "the bound for {name} does not cover {z:?}"
                )));
            }
        }
        size_a += u64::from(a);
        size_b += u64::from(b);
    }
    if size_a > size_b {
        return Err(Error::Precondition(format!("no injection: |A| = {size_a} exceeds |B| = {size_b}")));
    }
    let total = &bound_a.bound + &bound_b.bound;
    let two_s = s.mul_rational(&BigRational::from_integer(2.into()));
    let certified = size_a > 0 && two_s.cmp_rational(&total) != std::cmp::Ordering::Greater;
    let probability = if certified {
        BigRational::new(size_a.into(), (1u64 << k).into())
    } else {
        BigRational::zero()
    };
    Ok(PairingCert { k, size_a, size_b, bound_a, bound_b, s: s.clone(), certified, probability })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus_count(z: &[i8]) -> i32 {
        z.iter().map(|&x| i32::from(x)).sum()
    }

    fn bound(signs: &[i8], b: &str) -> SignedSumBound {
        SignedSumBound { signs: signs.to_vec(), bound: crate::surd::parse_rational(b).unwrap() }
    }

    #[test]
    fn seven_signs() {
        let c = pairing_certificate(
            7,
            &|z| plus_count(z) >= 3,
            &|z| plus_count(z) == 1,
            bound(&[-1, -1, 1, 1, 1, 1, 1], "0.95"),
            bound(&[-1, -1, -1, 1, 1, 1, 1], "0.175"),
            &Surd::parse("1/sqrt(5)").unwrap(),
        )
        .unwrap();
        assert_eq!((c.size_a, c.size_b), (29, 35));
        assert!(c.certified);
        assert_eq!(c.probability, BigRational::new(29.into(), 128.into()));
    }

    #[test]
    fn five_signs() {
        let c = pairing_certificate(
            5,
            &|z| plus_count(z) >= 3,
            &|z| plus_count(z) == 1,
            bound(&[-1, 1, 1, 1, 1], "1.04"),
            bound(&[-1, -1, 1, 1, 1], "0.23"),
            &Surd::parse("1/sqrt(3)").unwrap(),
        )
        .unwrap();
        assert_eq!((c.size_a, c.size_b), (6, 10));
        assert_eq!(c.probability, BigRational::new(3.into(), 16.into()));
    }

    #[test]
    fn weak_bounds_are_not_certified() {
        let c = pairing_certificate(
            5,
            &|z| plus_count(z) >= 3,
            &|z| plus_count(z) == 1,
            bound(&[-1, 1, 1, 1, 1], "0.9"),
            bound(&[-1, -1, 1, 1, 1], "0.2"),
            &Surd::parse("1/sqrt(3)").unwrap(),
        )
        .unwrap();
        assert!(!c.certified);
    }

    #[test]
    fn larger_source_set_has_no_injection() {
        let e = pairing_certificate(
            3,
            &|z| plus_count(z) >= -1,
            &|z| plus_count(z) == -3,
            bound(&[-1, -1, 1], "1"),
            bound(&[-1, -1, -1], "1"),
            &Surd::one(),
        )
        .unwrap_err();
        assert!(e.to_string().contains("no injection"), "{e}");
    }

    #[test]
    fn bound_must_cover_its_set() {
        // (-,+,+) sums to +1 but does not dominate (+,+,-)
        let e = pairing_certificate(
            3,
            &|z| plus_count(z) == 1,
            &|z| plus_count(z) == -1,
            bound(&[1, 1, -1], "0.5"),
            bound(&[-1, -1, 1], "0.5"),
            &Surd::parse("1/2").unwrap(),
        )
        .unwrap_err();
        assert!(e.to_string().contains("does not cover"), "{e}");
    }
}
