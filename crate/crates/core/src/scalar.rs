//! Exact scalars in ℚ or a real quadratic field ℚ(√d).
//!
//! A [`Scalar`] stores `a + b·√d` with `a`, `b` arbitrary-precision rationals and
//! `d` a square-free radicand. Values are kept in canonical form after every
//! operation: a rational value always has `b = 0` and `d = 0`, so structural
//! equality coincides with numeric equality.
//!
//! Arithmetic operators panic when asked to combine two different irrational
//! fields, mirroring how integer overflow or division by zero behave for the
//! primitive types. The `try_*` methods return a [`ScalarError`] instead.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot mix values from Q(sqrt({0})) and Q(sqrt({1}))")]
    MixedFields(u64, u64),
    #[error("radicand {0} is not square-free (reduce it before use)")]
    NotSquareFree(u64),
    #[error("malformed scalar {text:?}: {reason}")]
    Malformed { text: String, reason: String },
}

/// Exact element `a + b·√d` of ℚ(√d); `d = 0` encodes a rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    a: BigRational,
    b: BigRational,
    d: u64,
}

pub fn is_square_free(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn join_fields(d1: u64, d2: u64) -> Result<u64, ScalarError> {
    match (d1, d2) {
        (0, d) | (d, 0) => Ok(d),
        (x, y) if x == y => Ok(x),
        (x, y) => Err(ScalarError::MixedFields(x, y)),
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Scalar {
    fn canonical(a: BigRational, b: BigRational, d: u64) -> Self {
        if b.is_zero() || d == 0 {
            Scalar { a, b: BigRational::zero(), d: 0 }
        } else {
            Scalar { a, b, d }
        }
    }

    /// Builds `a + b·√d`, rejecting radicands that are not square-free.
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self, ScalarError> {
        if d != 0 && !is_square_free(d) {
            return Err(ScalarError::NotSquareFree(d));
        }
        Ok(Self::canonical(a, b, d))
    }

    pub fn from_rational(a: BigRational) -> Self {
        Scalar { a, b: BigRational::zero(), d: 0 }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den` as a rational scalar. Panics when `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_rational(rat(num, den))
    }

    /// `b·√d` with rational `b`.
    pub fn sqrt_times(b: BigRational, d: u64) -> Result<Self, ScalarError> {
        Self::new(BigRational::zero(), b, d)
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    /// Radicand of the field this value lives in, `0` for rationals.
    pub fn field(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    /// Exact sign of `a + b·√d`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (s, Ordering::Equal) => s,
            (Ordering::Equal, s) => s,
            (x, y) if x == y => x,
            (sa, _) => {
                // opposite signs: compare a² with b²·d
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
                match a2.cmp(&b2d) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn try_add(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        let d = join_fields(self.d, rhs.d)?;
        Ok(Self::canonical(&self.a + &rhs.a, &self.b + &rhs.b, d))
    }

    pub fn try_sub(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        let d = join_fields(self.d, rhs.d)?;
        Ok(Self::canonical(&self.a - &rhs.a, &self.b - &rhs.b, d))
    }

    pub fn try_mul(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        let d = join_fields(self.d, rhs.d)?;
        if self.b.is_zero() {
            return Ok(Self::canonical(&self.a * &rhs.a, &self.a * &rhs.b, d));
        }
        if rhs.b.is_zero() {
            return Ok(Self::canonical(&self.a * &rhs.a, &self.b * &rhs.a, d));
        }
        let dd = BigRational::from_integer(BigInt::from(d));
        let a = &self.a * &rhs.a + &self.b * &rhs.b * dd;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Ok(Self::canonical(a, b, d))
    }

    pub fn try_recip(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.b.is_zero() {
            return Ok(Self::from_rational(self.a.recip()));
        }
        // (a - b√d) / (a² - b²d); the norm is nonzero because d is not a square
        let dd = BigRational::from_integer(BigInt::from(self.d));
        let norm = &self.a * &self.a - &self.b * &self.b * dd;
        Ok(Self::canonical(&self.a / &norm, -(&self.b / &norm), self.d))
    }

    pub fn try_div(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        join_fields(self.d, rhs.d)?;
        self.try_mul(&rhs.try_recip()?)
    }

    pub fn try_cmp(&self, rhs: &Scalar) -> Result<Ordering, ScalarError> {
        Ok(self.try_sub(rhs)?.signum())
    }

    pub fn recip(&self) -> Scalar {
        self.try_recip().expect("reciprocal of zero")
    }

    /// Integer power; negative exponents invert. Panics on `0^k` with `k < 0`.
    pub fn powi(&self, k: i64) -> Scalar {
        let base = if k < 0 { self.recip() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Scalar::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            a
        } else {
            a + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
        }
    }

    /// Fixed-point decimal rendering with `places` digits, as used for SVG coordinates.
    pub fn to_decimal(&self, places: usize) -> String {
        let text = format!("{:.*}", places, self.to_f64());
        match text.strip_prefix('-') {
            Some(rest) if rest.bytes().all(|c| c == b'0' || c == b'.') => rest.to_string(),
            _ => text,
        }
    }
}

/// Returns the common field of a collection of scalars, or the first conflict.
pub fn common_field<'a>(values: impl IntoIterator<Item = &'a Scalar>) -> Result<u64, ScalarError> {
    values.into_iter().try_fold(0u64, |d, x| join_fields(d, x.d))
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    /// Total order on one field. Panics if the two values live in different
    /// irrational fields; use [`Scalar::try_cmp`] to handle that case.
    fn cmp(&self, other: &Self) -> Ordering {
        self.try_cmp(other).unwrap_or_else(|e| panic!("{e}"))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$try(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::canonical(-&self.a, -&self.b, self.d)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_integer(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_rational(r)
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(f, &self.a)?;
        if !self.b.is_zero() {
            f.write_str(if self.b.is_negative() { "-" } else { "+" })?;
            write_rational(f, &self.b.abs())?;
            write!(f, "*sqrt({})", self.d)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> ScalarError {
        ScalarError::Malformed { text: self.text.to_string(), reason: reason.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), ScalarError> {
        if self.text[self.pos..].starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.err(format!("expected {lit:?} at offset {}", self.pos)))
        }
    }

    fn digits(&mut self) -> Result<BigInt, ScalarError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected digits at offset {start}")));
        }
        Ok(BigInt::parse_bytes(&self.text.as_bytes()[start..self.pos], 10).expect("ascii digits"))
    }

    fn rational(&mut self) -> Result<BigRational, ScalarError> {
        let neg = self.eat(b'-');
        let num = self.digits()?;
        let den = if self.eat(b'/') { self.digits()? } else { BigInt::one() };
        if den.is_zero() {
            return Err(self.err("zero denominator"));
        }
        let r = BigRational::new(num, den);
        Ok(if neg { -r } else { r })
    }
}

/// Parses `rational [('+'|'-') rational '*sqrt(' digits ')']`.
pub fn parse_scalar(text: &str) -> Result<Scalar, ScalarError> {
    let mut cur = Cursor { text, pos: 0 };
    let a = cur.rational()?;
    if cur.peek().is_none() {
        return Ok(Scalar::from_rational(a));
    }
    let neg = match cur.peek() {
        Some(b'+') => false,
        Some(b'-') => true,
        _ => return Err(cur.err(format!("unexpected character at offset {}", cur.pos))),
    };
    cur.pos += 1;
    let mut b = cur.rational()?;
    if neg {
        b = -b;
    }
    cur.expect("*sqrt(")?;
    let radicand = cur.digits()?;
    cur.expect(")")?;
    if cur.peek().is_some() {
        return Err(cur.err(format!("trailing input at offset {}", cur.pos)));
    }
    let d = radicand.to_u64().ok_or_else(|| cur.err("radicand too large"))?;
    if !is_square_free(d) {
        return Err(ScalarError::NotSquareFree(d));
    }
    Scalar::new(a, b, d)
}

pub fn format_scalar(x: &Scalar) -> String {
    x.to_string()
}

impl FromStr for Scalar {
    type Err = ScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_scalar(s)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_scalar(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn rational_identities() {
        assert_eq!(s("1/3") + s("2/3"), Scalar::one());
        assert_eq!(s("1/3") * Scalar::from_integer(2), s("2/3"));
        assert_eq!(s("2/6").to_string(), "1/3");
    }

    #[test]
    fn conjugate_product() {
        assert_eq!(s("1+1*sqrt(2)") * s("1-1*sqrt(2)"), Scalar::from_integer(-1));
    }

    #[test]
    fn comparisons() {
        assert_eq!(s("1/3").cmp(&s("1/2")), Ordering::Less);
        assert_eq!(s("1-1*sqrt(2)").cmp(&Scalar::zero()), Ordering::Less);
        // 49/25 < 2
        assert_eq!(s("7/5").cmp(&s("0+1*sqrt(2)")), Ordering::Less);
        assert_eq!(s("3/2").cmp(&s("0+1*sqrt(2)")), Ordering::Greater);
        assert_eq!(s("-3/2").cmp(&s("0-1*sqrt(2)")), Ordering::Less);
    }

    #[test]
    fn rationality() {
        assert!(s("3/7").is_rational());
        assert!(!s("0+1/2*sqrt(2)").is_rational());
        let r2 = s("0+1*sqrt(2)");
        let v = &r2 * &r2 / Scalar::from_integer(2);
        assert!(v.is_rational());
        assert_eq!(v, Scalar::one());
        assert_eq!(v.field(), 0);
    }

    #[test]
    fn parse_and_format() {
        let x = s("1/4+1/4*sqrt(5)");
        assert_eq!(x.rational_part(), &rat(1, 4));
        assert_eq!(x.irrational_part(), &rat(1, 4));
        assert_eq!(x.field(), 5);
        assert_eq!(x.to_string(), "1/4+1/4*sqrt(5)");
        assert_eq!(s("-2/3-5*sqrt(7)").to_string(), "-2/3-5*sqrt(7)");
        assert_eq!(s("4+0*sqrt(3)").to_string(), "4");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_scalar("1+1*sqrt(8)"), Err(ScalarError::NotSquareFree(8))));
        assert!(matches!(parse_scalar("1+1*sqrt(1)"), Err(ScalarError::NotSquareFree(1))));
        for bad in ["", "abc", "1/", "1/0", "1+2", "1+2*sqrt(3", "1 + 2", "1+2*sqrt(3)x", "--1"] {
            assert!(parse_scalar(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn division_and_field_errors() {
        assert_eq!(Scalar::one().try_div(&Scalar::zero()), Err(ScalarError::DivisionByZero));
        assert_eq!(s("0+1*sqrt(2)").try_add(&s("0+1*sqrt(3)")), Err(ScalarError::MixedFields(2, 3)));
        // a rational promotes into any field
        assert_eq!(s("1/2").try_add(&s("0+1*sqrt(3)")).unwrap(), s("1/2+1*sqrt(3)"));
    }

    #[test]
    fn inverse_in_quadratic_field() {
        let x = s("3/4-2/5*sqrt(6)");
        assert_eq!(&x * x.recip(), Scalar::one());
    }

    #[test]
    fn powers() {
        assert_eq!(Scalar::from_integer(2).powi(-3), s("1/8"));
        assert_eq!(s("1+1*sqrt(2)").powi(2), s("3+2*sqrt(2)"));
        assert_eq!(s("5/7").powi(0), Scalar::one());
    }

    #[test]
    fn square_free() {
        assert!(is_square_free(2));
        assert!(is_square_free(30));
        assert!(!is_square_free(12));
        assert!(!is_square_free(49));
        assert!(!is_square_free(0));
        assert!(!is_square_free(1));
    }
}
