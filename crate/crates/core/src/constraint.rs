//! Certified linear constraints `Σ λᵢaᵢ < c` on the leading weights.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::surd::{rational_of_f64, Surd};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    /// `λᵢ ∈ {−1, 0, +1}`, indexed from the first weight.
    pub coeffs: Vec<i8>,
    pub bound: Surd,
    /// `<` when set, `≤` otherwise.
    pub strict: bool,
    /// Names the argument that certified the constraint.
    pub provenance: String,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<i8>, bound: Surd, strict: bool, provenance: impl Into<String>) -> Self {
        LinearConstraint { coeffs, bound, strict, provenance: provenance.into() }
    }

    /// Builds `Σλa op c` for `op ∈ {<, <=, >, >=}`, flipping the
    /// greater-than forms.
    pub fn from_relation(coeffs: Vec<i8>, op: &str, bound: Surd, provenance: impl Into<String>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| !(-1..=1).contains(*c)) {
            return Err(Error::InvalidParam(format!("coefficient {bad} is not in {{-1, 0, 1}}")));
        }
        let (coeffs, bound, strict) = match op {
            "<" => (coeffs, bound, true),
            "<=" => (coeffs, bound, false),
            ">" => (coeffs.iter().map(|c| -c).collect(), bound.neg(), true),
            ">=" => (coeffs.iter().map(|c| -c).collect(), bound.neg(), false),
            other => return Err(Error::InvalidParam(format!("unknown relation {other}"))),
        };
        Ok(LinearConstraint::new(coeffs, bound, strict, provenance))
    }

    /// Exact check at a rational point.
    pub fn holds_at(&self, a: &[BigRational]) -> bool {
        let sum: BigRational = self
            .coeffs
            .iter()
            .zip(a)
            .map(|(&c, v)| BigRational::from_integer(c.into()) * v)
            .sum();
        match self.bound.cmp_rational(&sum) {
            Ordering::Greater => true,
            Ordering::Equal => !self.strict,
            Ordering::Less => false,
        }
    }

    /// True when no point of the box satisfies the constraint. Box ends are
    /// exact doubles, so borderline cases are settled exactly. Coordinates
    /// past the box length are unconstrained.
    pub fn excludes_box(&self, intervals: &[Interval]) -> bool {
        let mut ends = Vec::with_capacity(self.coeffs.len());
        let mut min = Interval::ZERO;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let Some(iv) = intervals.get(i) else { return false };
            let end = if c > 0 { iv.lo } else { -iv.hi };
            ends.push(end);
            min = min + Interval::point(end);
        }
        let c = self.bound.enclosure();
        if min.lo > c.hi {
            return true;
        }
        if min.hi < c.lo {
            return false;
        }
        let Some(exact) = ends.iter().map(|&e| rational_of_f64(e)).sum::<Option<BigRational>>() else {
            return false;
        };
        match self.bound.cmp_rational(&exact) {
            Ordering::Less => true,
            Ordering::Equal => self.strict,
            Ordering::Greater => false,
        }
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = String::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c > 0 { "+" } else { "-" };
            if terms.is_empty() {
                if c < 0 {
                    terms.push('-');
                }
            } else {
                terms.push_str(&format!(" {sign} "));
            }
            terms.push_str(&format!("a{}", i + 1));
        }
        let op = if self.strict { "<" } else { "<=" };
        write!(f, "{terms} {op} {}", self.bound)
    }
}
