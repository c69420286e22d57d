//! Exact distribution oracle for finite Rademacher sums and the elementary
//! combinatorial bounds built on it.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::constraint::LinearConstraint;
use crate::error::{Error, Result};
use crate::surd::{common_denominator, Surd};

/// Non-increasing positive rational weights `a₁ ≥ … ≥ aₙ > 0`.
///
/// Unit variance is not required; [`WeightVector::is_normalized`] reports it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    weights: Vec<BigRational>,
}

impl WeightVector {
    pub fn new(weights: Vec<BigRational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_positive() {
                return Err(Error::InvalidWeights(format!("weight {} is not positive: {w}", i + 1)));
            }
            if i > 0 && w > &weights[i - 1] {
                return Err(Error::InvalidWeights(format!(
                    "weights must be non-increasing: a{} = {} < a{} = {w}",
                    i,
                    weights[i - 1],
                    i + 1
                )));
            }
        }
        Ok(WeightVector { weights })
    }

    /// Sorts into non-increasing order before validating.
    pub fn from_unsorted(mut weights: Vec<BigRational>) -> Result<Self> {
        weights.sort_by(|a, b| b.cmp(a));
        WeightVector::new(weights)
    }

    /// Requires `Σ aᵢ² = 1` exactly.
    pub fn normalized(weights: Vec<BigRational>) -> Result<Self> {
        let w = WeightVector::new(weights)?;
        if !w.is_normalized() {
            return Err(Error::InvalidWeights(format!("variance is {} rather than 1", w.variance())));
        }
        Ok(w)
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        WeightVector::from_unsorted(values.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    /// Parses a comma- or whitespace-separated list such as `1/2, 1/2, 1/4`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut weights = Vec::new();
        let mut offset = 0;
        for piece in text.split(|c: char| c == ',' || c.is_whitespace()) {
            let start = offset;
            offset += piece.len() + 1;
            if piece.is_empty() {
                continue;
            }
            let v = Surd::parse(piece).map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse { pos: start + pos, msg },
                other => other,
            })?;
            match v.as_rational() {
                Some(r) => weights.push(r.clone()),
                None => {
                    return Err(Error::Unsupported(format!(
                        "weight {piece} at position {start} is not rational; scale the vector to clear the root"
                    )))
                }
            }
        }
        WeightVector::from_unsorted(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn largest(&self) -> &BigRational {
        &self.weights[0]
    }

    pub fn variance(&self) -> BigRational {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.variance().is_one()
    }

    /// `y·√Var`, the raw threshold matching a standardized one.
    pub fn standardized_threshold(&self, y: &Surd) -> Result<Surd> {
        y.try_mul(&Surd::sqrt(&self.variance())?)
    }

    /// The weights after the first `k`.
    pub fn tail(&self, k: usize) -> Option<WeightVector> {
        (k < self.len()).then(|| WeightVector { weights: self.weights[k..].to_vec() })
    }

    pub fn scaled(&self, c: &BigRational) -> Result<WeightVector> {
        WeightVector::new(self.weights.iter().map(|w| w * c).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// An exact probability together with the tail convention that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailProbability {
    pub value: BigRational,
    /// `P(X > x)` rather than `P(X ≥ x)`.
    pub strict: bool,
}

impl TailProbability {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for TailProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

pub const DEFAULT_ENUMERATION_CAP: usize = 24;
const PLAIN_SCAN_LIMIT: usize = 20;

/// Configured tail-probability oracle.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    pub enumeration_cap: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { enumeration_cap: DEFAULT_ENUMERATION_CAP }
    }
}

impl Oracle {
    pub fn new(enumeration_cap: usize) -> Self {
        Oracle { enumeration_cap }
    }

    /// Exact `P(X ≥ x)`, `P(X > x)`, or the two-sided `P(|X| ≥ x)` / `P(|X| > x)`.
    pub fn tail_probability(
        &self,
        w: &WeightVector,
        x: &Surd,
        strict: bool,
        two_sided: bool,
    ) -> Result<TailProbability> {
        let n = w.len();
        if n > self.enumeration_cap {
            return Err(Error::EnumerationCap { n, cap: self.enumeration_cap });
        }
        let value = if two_sided {
            match x.signum() {
                Ordering::Less => BigRational::one(),
                Ordering::Equal if !strict => BigRational::one(),
                _ => one_sided(w, x, strict)? * BigRational::from_integer(2.into()),
            }
        } else {
            one_sided(w, x, strict)?
        };
        Ok(TailProbability { value, strict })
    }
}

/// [`Oracle::tail_probability`] with the default enumeration cap.
pub fn tail_probability(w: &WeightVector, x: &Surd, strict: bool, two_sided: bool) -> Result<TailProbability> {
    Oracle::default().tail_probability(w, x, strict, two_sided)
}

/// Integer lattice form of `w`: `aᵢ = nᵢ / L`.
pub(crate) fn lattice(w: &WeightVector) -> Result<(Vec<i128>, BigInt)> {
    let l = common_denominator(w.weights());
    let ints = w
        .weights()
        .iter()
        .map(|a| {
            (a * BigRational::from_integer(l.clone()))
                .to_integer()
                .to_i128()
                .ok_or_else(|| Error::Resource(format!("weight {a} exceeds the 128-bit lattice")))
        })
        .collect::<Result<Vec<_>>>()?;
    // the scan itself needs the full sum to fit
    ints.iter()
        .try_fold(0i128, |acc, &v| acc.checked_add(v))
        .ok_or_else(|| Error::Resource("lattice sum overflows 128 bits".into()))?;
    Ok((ints, l))
}

fn one_sided(w: &WeightVector, x: &Surd, strict: bool) -> Result<BigRational> {
    let n = w.len();
    let (ints, l) = lattice(w)?;
    let total: i128 = ints.iter().sum();
    // Σεᵢnᵢ = 2·(sum of the + subset) − total, compared against L·x
    let lx = x.mul_rational(&BigRational::from_integer(l));
    let half = lx.add_rational(&BigRational::from_integer(total.into())).mul_rational(&BigRational::new(
        1.into(),
        2.into(),
    ));
    let k = if strict { half.floor() + 1 } else { half.ceil() };
    let denom = BigInt::one() << n;
    let count = if k <= BigInt::zero() {
        denom.clone()
    } else if k > BigInt::from(total) {
        BigInt::zero()
    } else {
        let k = k.to_i128().expect("bounded by total");
        BigInt::from(count_subsets_at_least(&ints, k))
    };
    Ok(BigRational::new(count, denom))
}

/// Number of subsets of `ints` whose sum is at least `k`.
pub(crate) fn count_subsets_at_least(ints: &[i128], k: i128) -> u64 {
    if ints.len() <= PLAIN_SCAN_LIMIT {
        gray_scan(ints, k)
    } else {
        meet_in_the_middle(ints, k)
    }
}

fn gray_scan(ints: &[i128], k: i128) -> u64 {
    let n = ints.len();
    let mut sum = 0i128;
    let mut count = u64::from(sum >= k);
    let mut state = 0u64;
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        state ^= 1 << bit;
        if state & (1 << bit) != 0 {
            sum += ints[bit];
        } else {
            sum -= ints[bit];
        }
        count += u64::from(sum >= k);
    }
    count
}

pub(crate) fn subset_sums(ints: &[i128]) -> Vec<i128> {
    let mut sums = Vec::with_capacity(1 << ints.len());
    sums.push(0i128);
    for &v in ints {
        let len = sums.len();
        for j in 0..len {
            sums.push(sums[j] + v);
        }
    }
    sums
}

fn meet_in_the_middle(ints: &[i128], k: i128) -> u64 {
    let (left, right) = ints.split_at(ints.len() / 2);
    let l = subset_sums(left);
    let mut r = subset_sums(right);
    r.sort_unstable();
    l.iter()
        .map(|&a| {
            let need = k - a;
            (r.len() - r.partition_point(|&b| b < need)) as u64
        })
        .sum()
}

/// Residual thresholds `s − Σᵢ≤ₖ aᵢζᵢ` over all `ζ ∈ {−1,+1}ᵏ`, sorted.
///
/// `P(X ≥ s) = 2⁻ᵏ Σ P(Zₖ ≥ r)` over the returned multiset.
pub fn eliminate(w: &WeightVector, k: usize, s: &Surd) -> Result<Vec<Surd>> {
    if k == 0 || k > w.len() {
        return Err(Error::OutOfRange { what: "k", detail: format!("need 1 ≤ k ≤ {}, got {k}", w.len()) });
    }
    let head = &w.weights()[..k];
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0u32..(1u32 << k) {
        let shift: BigRational = head
            .iter()
            .enumerate()
            .map(|(i, a)| if mask & (1 << i) != 0 { a.clone() } else { -a })
            .sum();
        out.push(s.add_rational(&-shift));
    }
    out.sort_by(|a, b| a.try_cmp(b).expect("same field"));
    Ok(out)
}

/// Row `t` of Pascal's triangle.
pub fn binomial_row(t: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 0..t {
        let next = &row[i] * BigInt::from(t - i) / BigInt::from(i + 1);
        row.push(next);
    }
    row
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    binomial_row(n).swap_remove(k)
}

/// Sum of the `k` largest coefficients of row `t`.
pub fn erdos_f(t: usize, k: usize) -> Result<BigInt> {
    if k == 0 || k > t {
        return Err(Error::OutOfRange { what: "k", detail: format!("need 0 < k ≤ t = {t}, got {k}") });
    }
    let mut row = binomial_row(t);
    row.sort_by(|a, b| b.cmp(a));
    Ok(row.into_iter().take(k).sum())
}

/// `f(k,t)/2ᵗ`: an upper bound on the mass a sum of `t` weights whose `k`
/// smallest total at least `α` can put in an open window of half-width `α`.
pub fn erdos_anticoncentration_bound(t: usize, k: usize) -> Result<BigRational> {
    Ok(BigRational::new(erdos_f(t, k)?, BigInt::one() << t))
}

/// Linear constraints certified by the anti-concentration observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StructuralKind {
    /// `a₁ + a₂ < s` with `s = 1`.
    A1PlusA2,
    /// `a₃ + a₄ + a₅ < s`.
    A3A4A5,
    /// `a₁ < s`.
    A1Threshold,
    /// `a₁ + a₂ < s` for a general threshold.
    A1PlusA2Threshold,
}

impl StructuralKind {
    /// `(t, k, weight indices)`: the `k` smallest of the first `t` weights.
    pub fn shape(self) -> (usize, usize, &'static [usize]) {
        match self {
            StructuralKind::A1PlusA2 | StructuralKind::A1PlusA2Threshold => (2, 2, &[0, 1]),
            StructuralKind::A3A4A5 => (5, 3, &[2, 3, 4]),
            StructuralKind::A1Threshold => (1, 1, &[0]),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StructuralKind::A1PlusA2 => "a1+a2",
            StructuralKind::A3A4A5 => "a3+a4+a5",
            StructuralKind::A1Threshold => "a1-threshold",
            StructuralKind::A1PlusA2Threshold => "a1+a2-threshold",
        }
    }
}

impl std::str::FromStr for StructuralKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a1+a2" => Ok(StructuralKind::A1PlusA2),
            "a3+a4+a5" => Ok(StructuralKind::A3A4A5),
            "a1-threshold" => Ok(StructuralKind::A1Threshold),
            "a1+a2-threshold" => Ok(StructuralKind::A1PlusA2Threshold),
            other => Err(Error::InvalidParam(format!("unknown structural kind {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructuralOutcome {
    Certified {
        constraint: LinearConstraint,
        /// `f(k,t)/2ᵗ`
        witness: BigRational,
        /// `(1 − f(k,t)/2ᵗ)/2`, a lower bound on `P(X ≥ s)` when the
        /// constraint fails.
        tail_bound: BigRational,
    },
    NotProvable {
        tail_bound: BigRational,
    },
}

impl StructuralOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, StructuralOutcome::Certified { .. })
    }

    pub fn tail_bound(&self) -> &BigRational {
        match self {
            StructuralOutcome::Certified { tail_bound, .. } | StructuralOutcome::NotProvable { tail_bound } => {
                tail_bound
            }
        }
    }
}

/// Certifies that every `X` with `P(X ≥ s) < p` satisfies the constraint of
/// `kind` with bound `s`.
///
/// If the constrained weights total at least `s`, the first `t` weights put
/// at most `f(k,t)/2ᵗ` mass on `(−s, s)` after any shift, so
/// `P(X ≥ s) ≥ (1 − f(k,t)/2ᵗ)/2`. The constraint holds whenever that is at
/// least `p`. The certificate is uniform in the weights.
pub fn check_structural_constraint(s: &Surd, p: &BigRational, kind: StructuralKind) -> Result<StructuralOutcome> {
    if !s.is_positive() {
        return Err(Error::InvalidParam(format!("threshold must be positive, got {s}")));
    }
    let (t, k, idx) = kind.shape();
    let witness = erdos_anticoncentration_bound(t, k)?;
    let tail_bound = (BigRational::one() - &witness) / BigRational::from_integer(2.into());
    if &tail_bound < p {
        return Ok(StructuralOutcome::NotProvable { tail_bound });
    }
    let mut coeffs = vec![0i8; idx.iter().max().map_or(0, |m| m + 1)];
    for &i in idx {
        coeffs[i] = 1;
    }
    let constraint = LinearConstraint::new(coeffs, s.clone(), true, format!("structural {}", kind.label()));
    Ok(StructuralOutcome::Certified { constraint, witness, tail_bound })
}

/// Exact `P(Σ bᵢεᵢ ∈ (c − α, c + α))`.
pub fn window_probability(w: &WeightVector, center: &BigRational, alpha: &BigRational) -> Result<BigRational> {
    let lo = Surd::from_rational(center - alpha);
    let hi = Surd::from_rational(center + alpha);
    let above_lo = tail_probability(w, &lo, true, false)?.value;
    let at_or_above_hi = tail_probability(w, &hi, false, false)?.value;
    Ok(above_lo - at_or_above_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn wv(v: &[(i64, i64)]) -> WeightVector {
        WeightVector::from_unsorted(v.iter().map(|&(n, d)| r(n, d)).collect()).unwrap()
    }

    #[test]
    fn six_equal_weights_two_sided() {
        let w = WeightVector::from_integers(&[1; 6]).unwrap();
        let x = Surd::parse("sqrt(6)").unwrap();
        assert_eq!(tail_probability(&w, &x, false, true).unwrap().value, r(7, 32));
    }

    #[test]
    fn single_sign() {
        let w = WeightVector::from_integers(&[1]).unwrap();
        assert_eq!(tail_probability(&w, &Surd::one(), false, false).unwrap().value, r(1, 2));
        assert_eq!(tail_probability(&w, &Surd::one(), true, false).unwrap().value, r(0, 1));
    }

    #[test]
    fn case_h_vector_strict() {
        let w = wv(&[(1, 2), (1, 2), (1, 2), (1, 4), (1, 4), (1, 4), (1, 4)]);
        assert!(w.is_normalized());
        assert_eq!(tail_probability(&w, &Surd::one(), true, false).unwrap().value, r(7, 64));
    }

    #[test]
    fn seven_equal_weights_at_inverse_sqrt5() {
        let w = WeightVector::from_integers(&[1; 7]).unwrap();
        let x = w.standardized_threshold(&Surd::parse("1/sqrt(5)").unwrap()).unwrap();
        assert_eq!(tail_probability(&w, &x, false, true).unwrap().value, r(29, 64));
    }

    #[test]
    fn meet_in_the_middle_matches_scan() {
        let ints: Vec<i128> = (1..=22).map(|i| (i * 7919 % 97 + 1) as i128).collect();
        let total: i128 = ints.iter().sum();
        for k in [0, 1, total / 3, total / 2, total / 2 + 1, total] {
            assert_eq!(meet_in_the_middle(&ints, k), gray_scan(&ints, k));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let w = WeightVector::from_integers(&[1; 25]).unwrap();
        assert!(matches!(
            tail_probability(&w, &Surd::zero(), false, false),
            Err(Error::EnumerationCap { n: 25, cap: 24 })
        ));
        let w24 = WeightVector::from_integers(&[1; 24]).unwrap();
        let p = tail_probability(&w24, &Surd::from_integer(1), false, false).unwrap();
        // P(S ≥ 1) for 24 fair signs = (1 − P(S = 0))/2
        let centre = BigRational::new(binomial(24, 12), BigInt::one() << 24);
        assert_eq!(p.value, (BigRational::one() - centre) / r(2, 1));
    }

    #[test]
    fn irrational_weights_rejected() {
        assert!(matches!(WeightVector::parse("1, sqrt(2)"), Err(Error::Unsupported(_))));
        assert!(matches!(WeightVector::parse("1, 1/x"), Err(Error::Parse { pos: 5, .. })));
        assert!(WeightVector::parse("1/2, 1/2, 1/4").is_ok());
    }

    #[test]
    fn elimination_examples() {
        let w = wv(&[(1, 1)]);
        let res = eliminate(&w, 1, &Surd::one()).unwrap();
        assert_eq!(res, vec![Surd::zero(), Surd::from_integer(2)]);
        let w = wv(&[(1, 2), (1, 2)]);
        let res: Vec<Surd> = eliminate(&w, 2, &Surd::one()).unwrap();
        let expect: Vec<Surd> = [0, 1, 1, 2].iter().map(|&v| Surd::from_integer(v)).collect();
        assert_eq!(res, expect);
        assert!(eliminate(&w, 3, &Surd::one()).is_err());
        assert!(eliminate(&w, 0, &Surd::one()).is_err());
    }

    #[test]
    fn erdos_values() {
        assert_eq!(erdos_anticoncentration_bound(4, 1).unwrap(), r(6, 16));
        assert_eq!(erdos_anticoncentration_bound(6, 2).unwrap(), r(35, 64));
        assert_eq!(erdos_anticoncentration_bound(2, 2).unwrap(), r(3, 4));
        assert!(erdos_anticoncentration_bound(2, 3).is_err());
        assert!(erdos_anticoncentration_bound(2, 0).is_err());
    }

    #[test]
    fn structural_constraints() {
        let one = Surd::one();
        let p = r(7, 64);
        for kind in [StructuralKind::A1PlusA2, StructuralKind::A3A4A5] {
            let out = check_structural_constraint(&one, &p, kind).unwrap();
            assert!(out.is_certified(), "{kind:?}");
        }
        let a345 = check_structural_constraint(&one, &p, StructuralKind::A3A4A5).unwrap();
        assert_eq!(a345.tail_bound(), &p);
        let s = Surd::parse("2/sqrt(6)").unwrap();
        let out = check_structural_constraint(&s, &r(1, 8), StructuralKind::A1PlusA2Threshold).unwrap();
        match out {
            StructuralOutcome::Certified { constraint, .. } => {
                assert_eq!(constraint.coeffs, vec![1, 1]);
                assert_eq!(constraint.bound, s);
            }
            _ => panic!("expected certificate"),
        }
        let out = check_structural_constraint(&one, &r(1, 2), StructuralKind::A1Threshold).unwrap();
        assert!(!out.is_certified());
    }

    fn small_weights() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(1i64..12, 1..9)
    }

    fn threshold() -> impl Strategy<Value = (i64, i64)> {
        (-40i64..40, 1i64..6)
    }

    proptest! {
        #[test]
        fn symmetry(ws in small_weights(), (n, d) in threshold()) {
            let w = WeightVector::from_integers(&ws).unwrap();
            let x = Surd::from_ratio(n, d);
            let ge = tail_probability(&w, &x, false, false).unwrap().value;
            let gt_neg = tail_probability(&w, &x.neg(), true, false).unwrap().value;
            prop_assert_eq!(ge + gt_neg, BigRational::one());
        }

        #[test]
        fn monotone_and_strict_below(ws in small_weights(), (n, d) in threshold(), step in 1i64..10) {
            let w = WeightVector::from_integers(&ws).unwrap();
            let x = Surd::from_ratio(n, d);
            let y = Surd::from_ratio(n * 2 + step, d * 2);
            let px = tail_probability(&w, &x, false, false).unwrap().value;
            let py = tail_probability(&w, &y, false, false).unwrap().value;
            let sx = tail_probability(&w, &x, true, false).unwrap().value;
            prop_assert!(py <= px);
            prop_assert!(sx <= px);
        }

        #[test]
        fn elimination_identity(ws in prop::collection::vec(1i64..12, 2..12), (n, d) in threshold(), kk in 1usize..11) {
            let w = WeightVector::from_integers(&ws).unwrap();
            let k = 1 + kk % (w.len() - 1);
            let s = Surd::from_ratio(n, d);
            let tail = w.tail(k).unwrap();
            let total: BigRational = eliminate(&w, k, &s).unwrap().iter()
                .map(|t| tail_probability(&tail, t, false, false).unwrap().value)
                .sum();
            let direct = tail_probability(&w, &s, false, false).unwrap().value;
            prop_assert_eq!(total / BigRational::from_integer(BigInt::one() << k), direct);
        }

        #[test]
        fn scaling(ws in small_weights(), (n, d) in threshold(), c in 1i64..7, e in 1i64..7) {
            let w = WeightVector::from_integers(&ws).unwrap();
            let cr = r(c, e);
            let x = Surd::from_ratio(n, d);
            let a = tail_probability(&w, &x, false, false).unwrap().value;
            let b = tail_probability(&w.scaled(&cr).unwrap(), &x.mul_rational(&cr), false, false).unwrap().value;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn erdos_dominance(ws in prop::collection::vec(1i64..20, 1..9), kk in 0usize..8, (n, d) in threshold()) {
            let w = WeightVector::from_integers(&ws).unwrap();
            let t = w.len();
            let k = 1 + kk % t;
            let alpha: BigRational = w.weights()[t - k..].iter().sum();
            let centre = r(n, d);
            let mass = window_probability(&w, &centre, &alpha).unwrap();
            prop_assert!(mass <= erdos_anticoncentration_bound(t, k).unwrap());
        }

        #[test]
        fn structural_bound_is_valid(ws in prop::collection::vec(1i64..30, 5..10), which in 0usize..3) {
            // scale so the constrained weights total exactly s = 1, then check
            // the certified tail bound against the oracle
            let kind = [StructuralKind::A1PlusA2, StructuralKind::A3A4A5, StructuralKind::A1Threshold][which];
            let raw = WeightVector::from_integers(&ws).unwrap();
            let (_, _, idx) = kind.shape();
            let sum: BigRational = idx.iter().map(|&i| raw.weights()[i].clone()).sum();
            let w = raw.scaled(&(BigRational::one() / sum)).unwrap();
            let out = check_structural_constraint(&Surd::one(), &BigRational::zero(), kind).unwrap();
            let p = tail_probability(&w, &Surd::one(), false, false).unwrap().value;
            prop_assert!(&p >= out.tail_bound());
        }
    }
}
