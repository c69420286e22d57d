//! Exact numbers of the form `r + c·√m` with rational `r`, `c` and a
//! squarefree integer radicand `m`.
//!
//! Every threshold that shows up in the tail inequalities (`1/√7`,
//! `2/√6`, `y·√Var`) lives in a single quadratic field, so comparisons
//! against rational lattice sums can be decided exactly by squaring.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// `rational + coeff·√radicand`, kept in canonical form: the radicand is a
/// squarefree integer greater than one, or one when `coeff` is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    rational: BigRational,
    coeff: BigRational,
    radicand: BigInt,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Splits `n > 0` into `(s, m)` with `n = s²·m`. `m` is squarefree whenever
/// trial division up to 10⁶ (or √n) factors `n` completely.
fn square_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut outside = BigInt::one();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(1_000_000u32);
    while &p * &p <= rest && p <= limit {
        let sq = &p * &p;
        while (&rest % &sq).is_zero() {
            rest /= &sq;
            outside *= &p;
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    let r = rest.sqrt();
    if &r * &r == rest {
        outside *= &r;
        rest = BigInt::one();
    }
    (outside, rest)
}

impl Surd {
    pub fn zero() -> Self {
        Surd::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Surd::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        Surd { rational: r, coeff: BigRational::zero(), radicand: BigInt::one() }
    }

    pub fn from_integer(n: i64) -> Self {
        Surd::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Surd::from_rational(ratio(n, d))
    }

    /// `√r` for a non-negative rational `r`.
    pub fn sqrt(r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::Unsupported(format!("square root of negative value {r}")));
        }
        if r.is_zero() {
            return Ok(Surd::zero());
        }
        // √(p/q) = √(pq)/q
        let pq = r.numer() * r.denom();
        let (outside, m) = square_split(&pq);
        let c = BigRational::new(outside, r.denom().clone());
        Ok(Surd::with_parts(BigRational::zero(), c, m))
    }

    /// `c·√m` for rational `c` and rational `m ≥ 0`.
    pub fn scaled_sqrt(c: &BigRational, m: &BigRational) -> Result<Self> {
        Ok(Surd::sqrt(m)?.mul_rational(c))
    }

    fn with_parts(rational: BigRational, coeff: BigRational, radicand: BigInt) -> Self {
        if coeff.is_zero() || radicand.is_one() {
            let r = if radicand.is_one() { rational + coeff } else { rational };
            return Surd::from_rational(r);
        }
        Surd { rational, coeff, radicand }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn surd_coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn radicand(&self) -> &BigInt {
        &self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.rational)
    }

    /// True for values of the form `c·√m` (including plain rationals).
    pub fn is_pure(&self) -> bool {
        self.coeff.is_zero() || self.rational.is_zero()
    }

    fn compatible(&self, other: &Surd) -> Option<BigInt> {
        if self.is_rational() {
            Some(other.radicand.clone())
        } else if other.is_rational() || self.radicand == other.radicand {
            Some(self.radicand.clone())
        } else {
            None
        }
    }

    fn incompatible(&self, other: &Surd) -> Error {
        Error::Unsupported(format!("values {self} and {other} lie in different quadratic fields"))
    }

    pub fn neg(&self) -> Surd {
        Surd { rational: -&self.rational, coeff: -&self.coeff, radicand: self.radicand.clone() }
    }

    pub fn add_rational(&self, r: &BigRational) -> Surd {
        Surd { rational: &self.rational + r, ..self.clone() }
    }

    pub fn mul_rational(&self, r: &BigRational) -> Surd {
        Surd::with_parts(&self.rational * r, &self.coeff * r, self.radicand.clone())
    }

    pub fn try_add(&self, other: &Surd) -> Result<Surd> {
        let m = self.compatible(other).ok_or_else(|| self.incompatible(other))?;
        Ok(Surd::with_parts(&self.rational + &other.rational, &self.coeff + &other.coeff, m))
    }

    pub fn try_sub(&self, other: &Surd) -> Result<Surd> {
        self.try_add(&other.neg())
    }

    /// Product; defined for operands in the same field, or for two pure
    /// operands `c·√m` and `c'·√m'`.
    pub fn try_mul(&self, other: &Surd) -> Result<Surd> {
        if let Some(m) = self.compatible(other) {
            let mr = BigRational::from_integer(m.clone());
            let (a, b, c, d) = (&self.rational, &self.coeff, &other.rational, &other.coeff);
            let rational = a * c + b * d * &mr;
            let coeff = a * d + b * c;
            return Ok(Surd::with_parts(rational, coeff, m));
        }
        if self.rational.is_zero() && other.rational.is_zero() {
            let c = &self.coeff * &other.coeff;
            let m = BigRational::from_integer(&self.radicand * &other.radicand);
            return Surd::scaled_sqrt(&c, &m);
        }
        Err(self.incompatible(other))
    }

    pub fn try_recip(&self) -> Result<Surd> {
        if self.is_zero() {
            return Err(Error::InvalidParam("division by zero".into()));
        }
        // 1/(a + b√m) = (a − b√m)/(a² − b²m)
        let m = BigRational::from_integer(self.radicand.clone());
        let norm = &self.rational * &self.rational - &self.coeff * &self.coeff * m;
        Ok(Surd::with_parts(
            &self.rational / &norm,
            -&self.coeff / &norm,
            self.radicand.clone(),
        ))
    }

    pub fn try_div(&self, other: &Surd) -> Result<Surd> {
        self.try_mul(&other.try_recip()?)
    }

    /// `√self` for a non-negative pure value; `√(c√m)` is only defined
    /// when the result stays quadratic, i.e. for rational `self`.
    pub fn try_sqrt(&self) -> Result<Surd> {
        match self.as_rational() {
            Some(r) => Surd::sqrt(r),
            None => Err(Error::Unsupported(format!("square root of irrational {self}"))),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.coeff.is_zero()
    }

    /// Exact sign of the value.
    pub fn signum(&self) -> Ordering {
        let u = &self.rational;
        let v = &self.coeff;
        if v.is_zero() {
            return u.cmp(&BigRational::zero());
        }
        let zero = BigRational::zero();
        let su = u.cmp(&zero);
        let sv = v.cmp(&zero);
        if su != Ordering::Less && sv == Ordering::Greater {
            return Ordering::Greater;
        }
        if su != Ordering::Greater && sv == Ordering::Less {
            return Ordering::Less;
        }
        // opposite signs: compare u² with v²m
        let m = BigRational::from_integer(self.radicand.clone());
        let u2 = u * u;
        let v2m = v * v * m;
        match su {
            Ordering::Greater => u2.cmp(&v2m),
            _ => v2m.cmp(&u2),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn try_cmp(&self, other: &Surd) -> Result<Ordering> {
        Ok(self.try_sub(other)?.signum())
    }

    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        self.add_rational(&-r).signum()
    }

    /// Largest integer `n` with `n ≤ self`, computed without floating point.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.rational.floor().to_integer();
        }
        // self = a + s·√r with r = coeff²·m
        let m = BigRational::from_integer(self.radicand.clone());
        let r = &self.coeff * &self.coeff * m;
        let root_floor = r.floor().to_integer().sqrt();
        let guess = if self.coeff.is_positive() {
            (&self.rational + BigRational::from_integer(root_floor)).floor().to_integer()
        } else {
            (&self.rational - BigRational::from_integer(root_floor + 1)).floor().to_integer()
        };
        let mut n: BigInt = guess - 1;
        while self.cmp_rational(&BigRational::from_integer(&n + 1)) != Ordering::Less {
            n += 1;
        }
        while self.cmp_rational(&BigRational::from_integer(n.clone())) == Ordering::Less {
            n -= 1;
        }
        n
    }

    /// Smallest integer `n` with `n ≥ self`.
    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.is_rational() {
            return r;
        }
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        let m = self.radicand.to_f64().unwrap_or(f64::NAN);
        r + c * m.sqrt()
    }

    /// An outward-rounded floating-point enclosure of the value.
    pub fn enclosure(&self) -> Interval {
        let r = rational_enclosure(&self.rational);
        if self.is_rational() {
            return r;
        }
        let c = rational_enclosure(&self.coeff);
        let m = rational_enclosure(&BigRational::from_integer(self.radicand.clone()));
        r + c * m.sqrt()
    }

    /// Parses expressions such as `7/64`, `0.378`, `1/sqrt(7)`, `2/sqrt(6)`,
    /// `sqrt(7/5)` or `1 - 1/sqrt(7)`.
    pub fn parse(text: &str) -> Result<Surd> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(v)
    }
}

/// Tightest `f64` enclosure of a rational; a point when `r` is a double.
pub fn rational_enclosure(r: &BigRational) -> Interval {
    let v = r.to_f64().unwrap_or(f64::NAN);
    if !v.is_finite() {
        return Interval::ENTIRE;
    }
    Interval::new(rational_lower(r), rational_upper(r))
}

/// Conversion of an exact rational to the nearest `f64` at or above it.
pub fn rational_upper(r: &BigRational) -> f64 {
    let v = r.to_f64().unwrap_or(f64::INFINITY);
    let mut up = v;
    while rational_of_f64(up).map_or(false, |u| &u < r) {
        up = up.next_up();
    }
    up
}

/// Conversion of an exact rational to the nearest `f64` at or below it.
pub fn rational_lower(r: &BigRational) -> f64 {
    -rational_upper(&-r)
}

/// The exact rational value of a finite `f64`.
pub fn rational_of_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.rational);
        }
        let surd = if self.coeff.is_one() {
            format!("sqrt({})", self.radicand)
        } else if (-&self.coeff).is_one() {
            format!("-sqrt({})", self.radicand)
        } else {
            format!("{}*sqrt({})", self.coeff, self.radicand)
        };
        if self.rational.is_zero() {
            write!(f, "{surd}")
        } else if self.coeff.is_negative() {
            write!(f, "{} {}", self.rational, surd.replacen('-', "- ", 1))
        } else {
            write!(f, "{} + {}", self.rational, surd)
        }
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

impl From<BigRational> for Surd {
    fn from(r: BigRational) -> Self {
        Surd::from_rational(r)
    }
}

impl std::str::FromStr for Surd {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Surd::parse(s)
    }
}

/// Parses a plain rational: `3`, `-7/64`, `0.378`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let v = Surd::parse(text)?;
    v.as_rational().cloned().ok_or_else(|| Error::Parse { pos: 0, msg: format!("expected a rational, got {v}") })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn lift(&self, at: usize, r: Result<Surd>) -> Result<Surd> {
        r.map_err(|e| match e {
            Error::Parse { .. } => e,
            other => Error::Parse { pos: at, msg: other.to_string() },
        })
    }

    fn expr(&mut self) -> Result<Surd> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.term()?;
            acc = self.lift(at, if c == b'+' { acc.try_add(&rhs) } else { acc.try_sub(&rhs) })?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Surd> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            acc = self.lift(at, if c == b'*' { acc.try_mul(&rhs) } else { acc.try_div(&rhs) })?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Surd> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.factor(),
        }
    }

    fn factor(&mut self) -> Result<Surd> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(b's') if self.src[self.pos..].starts_with(b"sqrt") => {
                let at = self.pos;
                self.pos += 4;
                if self.peek() != Some(b'(') {
                    return Err(self.error("expected '(' after sqrt"));
                }
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                let r = inner.try_sqrt();
                self.lift(at, r)
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Surd> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len = 0u32;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            self.pos = start;
            return Err(self.error("expected digits"));
        }
        let n: BigInt = digits.parse().map_err(|_| Error::Parse { pos: start, msg: "bad number".into() })?;
        let d = num_traits::pow(BigInt::from(10u32), frac_len as usize);
        Ok(Surd::from_rational(BigRational::new(n, d)))
    }
}

/// Least common multiple of the denominators.
pub(crate) fn common_denominator<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}
