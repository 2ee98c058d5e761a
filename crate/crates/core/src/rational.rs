//! Exact rational scalars and their text encoding.
//!
//! Text form: a plain decimal when the reduced denominator is a power of ten
//! (`"3"`, `"-0.25"`), otherwise `"p/q"`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

#[inline]
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[inline]
pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact conversion of a finite float.
pub fn from_f64(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::invalid(format!("non-finite value {v}")))
}

#[inline]
pub fn to_f64(v: &Rational) -> f64 {
    match v.to_f64() {
        Some(f) => f,
        None => {
            // huge numerator/denominator: scale down before dividing
            let n = v.numer().to_f64().unwrap_or(f64::NAN);
            let d = v.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

pub fn sign(v: &Rational) -> i32 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Formats `v` using the decimal/fraction convention of the JSON formats.
pub fn format(v: &Rational) -> String {
    let den = v.denom();
    let mut d = den.clone();
    let mut digits = 0usize;
    let ten = BigInt::from(10);
    while (&d % &ten).is_zero() {
        d /= &ten;
        digits += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", v.numer(), den);
    }
    if digits == 0 {
        return v.numer().to_string();
    }
    let neg = v.is_negative();
    let mag = v.numer().abs().to_string();
    let padded = if mag.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - mag.len()), mag) } else { mag };
    let (whole, fracpart) = padded.split_at(padded.len() - digits);
    format!("{}{}.{}", if neg { "-" } else { "" }, whole, fracpart)
}

/// Parses `"p/q"`, integers and plain decimals (`"-1.25"`, `"1e-3"` is not accepted).
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("malformed rational {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, fracpart)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !fracpart.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let joined = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, fracpart);
        let mut num: BigInt = joined.parse().map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let den = BigInt::from(10).pow(fracpart.len() as u32);
        return Ok(Rational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Serde adapter: rationals as strings, accepting JSON numbers on input.
pub mod serde_str {
    use super::*;
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl de::Visitor<'_> for RationalVisitor {
        type Value = Rational;
        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a rational as \"p/q\", a decimal string or a number")
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
            parse(v).map_err(E::custom)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
            Ok(int(v))
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
            // shortest decimal literal, not the binary expansion
            parse(&v.to_string()).or_else(|_| from_f64(v)).map_err(E::custom)
        }
    }
}
