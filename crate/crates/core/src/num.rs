//! Exact scalars used throughout the crate.
//!
//! Jump locations and values are kept as rationals so that strict
//! comparisons such as `F(t) > 1 - t` are decided exactly. JSON numbers are
//! read through their shortest decimal form, so `0.3` becomes `3/10` rather
//! than the nearest binary64.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Denominator used when a binary64 has to be turned back into a rational.
const DYADIC_DENOM: i128 = 1 << 40;

pub fn rat(numer: i128, denom: i128) -> Rational {
    Rational::new(numer, denom)
}

pub fn int(v: i128) -> Rational {
    Rational::from_integer(v)
}

pub fn to_f64(r: &Rational) -> f64 {
    let (n, d) = (*r.numer(), *r.denom());
    match (n.to_f64(), d.to_f64()) {
        (Some(n), Some(d)) => n / d,
        _ => f64::NAN,
    }
}

/// Rounds a binary64 to the nearest multiple of `2^-40`.
pub fn from_f64_dyadic(v: f64) -> Rational {
    Rational::new((v * DYADIC_DENOM as f64).round() as i128, DYADIC_DENOM)
}

/// Parses `"3/10"`, `"0.3"`, `"-2"`, `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
        let d: i128 = d.trim().parse().map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
        if d == 0 {
            return Err(Error::parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(s).ok_or_else(|| Error::parse(format!("not a rational number: {s:?}")))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut numer: i128 = 0;
    for c in whole.chars().chain(frac.chars()) {
        numer = numer.checked_mul(10)?.checked_add(c.to_digit(10)? as i128)?;
    }
    let scale = exp - frac.len() as i32;
    let pow = 10i128.checked_pow(scale.unsigned_abs())?;
    let mut r = if scale >= 0 {
        Rational::from_integer(numer.checked_mul(pow)?)
    } else {
        Rational::new(numer, pow)
    };
    if neg {
        r = -r;
    }
    Some(r)
}

/// Converts a JSON binary64 back to the decimal literal it was written as.
pub fn rational_from_json_f64(v: f64) -> Result<Rational> {
    if !v.is_finite() {
        return Err(Error::parse(format!("non-finite number {v}")));
    }
    match parse_decimal(&format!("{v}")) {
        Some(r) => Ok(r),
        None => Rational::approximate_float(v).ok_or_else(|| Error::parse(format!("number out of range: {v}"))),
    }
}

fn rational_is_json_exact(r: &Rational) -> bool {
    let f = to_f64(r);
    f.is_finite() && parse_decimal(&format!("{f}")).as_ref() == Some(r)
}

/// Serializes as a JSON number when that round-trips exactly, else as `"p/q"`.
pub fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    if rational_is_json_exact(r) {
        if r.is_integer() {
            if let Some(i) = r.numer().to_i64() {
                return s.serialize_i64(i);
            }
        }
        s.serialize_f64(to_f64(r))
    } else {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a string like \"3/10\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
        Ok(int(v as i128))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
        Ok(int(v as i128))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
        rational_from_json_f64(v).map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
        parse_rational(v).map_err(E::custom)
    }
}

pub fn deserialize_rational<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
    d.deserialize_any(RationalVisitor)
}

/// A point of the extended real line `[-inf, inf]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtReal {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtReal {
    pub fn finite(r: Rational) -> Self {
        ExtReal::Finite(r)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtReal::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(r) => to_f64(r),
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            ExtReal::NegInf => true,
            ExtReal::Finite(r) => r.is_negative(),
            ExtReal::PosInf => false,
        }
    }

    /// Shifts by a finite amount; infinities are fixed points.
    pub fn shift(&self, by: &Rational) -> ExtReal {
        match self {
            ExtReal::Finite(r) => ExtReal::Finite(r + by),
            other => other.clone(),
        }
    }

    pub fn scale(&self, by: &Rational) -> ExtReal {
        debug_assert!(by.is_positive());
        match self {
            ExtReal::Finite(r) => ExtReal::Finite(r * by),
            other => other.clone(),
        }
    }
}

impl From<Rational> for ExtReal {
    fn from(r: Rational) -> Self {
        ExtReal::Finite(r)
    }
}

impl From<i64> for ExtReal {
    fn from(v: i64) -> Self {
        ExtReal::Finite(int(v as i128))
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for &ExtReal {
    type Output = ExtReal;

    /// `-inf + inf` is taken to be `-inf`; it never arises for members of D+.
    fn add(self, rhs: &ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, rhs) {
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }
}

impl Sub<&Rational> for &ExtReal {
    type Output = ExtReal;

    fn sub(self, rhs: &Rational) -> ExtReal {
        self.shift(&-rhs)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::Finite(r) => ExtReal::Finite(-r),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            ExtReal::Finite(r) if rational_is_json_exact(r) => write!(f, "{}", to_f64(r)),
            ExtReal::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::PosInf => s.serialize_str("inf"),
            ExtReal::Finite(r) => serialize_rational(r, s),
        }
    }
}

struct ExtRealVisitor;

impl<'de> Visitor<'de> for ExtRealVisitor {
    type Value = ExtReal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number, \"-inf\", \"inf\" or a rational string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
        Ok(ExtReal::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
        Ok(ExtReal::Finite(int(v as i128)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
        if v == f64::INFINITY {
            return Ok(ExtReal::PosInf);
        }
        if v == f64::NEG_INFINITY {
            return Ok(ExtReal::NegInf);
        }
        rational_from_json_f64(v).map(ExtReal::Finite).map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
        match v.trim() {
            "-inf" | "-infinity" => Ok(ExtReal::NegInf),
            "inf" | "+inf" | "infinity" => Ok(ExtReal::PosInf),
            other => parse_rational(other).map(ExtReal::Finite).map_err(E::custom),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<ExtReal, D::Error> {
        d.deserialize_any(ExtRealVisitor)
    }
}

/// Serde adapter for plain `Rational` fields.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_rational(r, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        deserialize_rational(d)
    }
}

pub fn is_unit(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

pub fn clamp_unit(r: Rational) -> Rational {
    if r.is_negative() {
        Rational::zero()
    } else if r > Rational::one() {
        Rational::one()
    } else {
        r
    }
}
