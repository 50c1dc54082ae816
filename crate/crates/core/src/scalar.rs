//! Scalar modes.
//!
//! All positions, distances and energies are computed through the [`Scalar`]
//! trait, which has two implementations: [`Rational`] (arbitrary precision,
//! always in lowest terms) and `f64`. Generic code is monomorphised per mode,
//! so mixing modes inside one computation is a type error rather than a
//! runtime one. Mode selection at the file/CLI boundary goes through [`Mode`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float64,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Rational => f.write_str("rational"),
            Mode::Float64 => f.write_str("float64"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float64" | "float" | "f64" => Ok(Mode::Float64),
            other => Err(Error::Parse(format!("unknown scalar mode `{other}`"))),
        }
    }
}

/// Real-number arithmetic used throughout the crate.
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_usize(n: usize) -> Self;

    /// Largest integer not greater than `self`.
    fn floor(&self) -> Self;

    fn to_f64(&self) -> f64;

    /// Parses `"a/b"`, `"a"`, a decimal such as `"0.001"`, or scientific
    /// notation such as `"1e-6"`. Rational parsing is exact.
    fn parse_literal(s: &str) -> Result<Self>;

    /// Serialized form: `"a/b"` (or `"a"`) for rationals, shortest
    /// round-trip decimal for floats.
    fn to_literal(&self) -> String;

    /// Equality up to an absolute tolerance; exact equality for rationals.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    fn is_exact() -> bool {
        Self::MODE == Mode::Rational
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Rational;

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_usize(n: usize) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn floor(&self) -> Self {
        Rational::floor(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_literal(s: &str) -> Result<Self> {
        parse_rational(s)
    }

    fn to_literal(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float64;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_usize(n: usize) -> Self {
        n as f64
    }

    fn floor(&self) -> Self {
        f64::floor(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_literal(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('/') {
            return parse_rational(s).map(|q| Scalar::to_f64(&q));
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("invalid number `{s}`")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Parse(format!("non-finite number `{s}`")))
        }
    }

    fn to_literal(&self) -> String {
        format!("{self}")
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal `{s}`"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(idx) => {
            let exp: i64 = s[idx + 1..].parse().map_err(|_| bad())?;
            (&s[..idx], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(joined.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn rationals_are_reduced() {
        let x = q(6, -8);
        assert_eq!(x.numer(), &BigInt::from(-3));
        assert_eq!(x.denom(), &BigInt::from(4));
        assert_eq!(x.to_literal(), "-3/4");
        assert_eq!(q(10, 5).to_literal(), "2");
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(Rational::parse_literal("3/8").unwrap(), q(3, 8));
        assert_eq!(Rational::parse_literal("12/5").unwrap(), q(12, 5));
        assert_eq!(Rational::parse_literal("0.001").unwrap(), q(1, 1000));
        assert_eq!(Rational::parse_literal("-1.78").unwrap(), q(-178, 100));
        assert_eq!(Rational::parse_literal("1e-6").unwrap(), q(1, 1_000_000));
        assert_eq!(Rational::parse_literal("2.5E2").unwrap(), q(250, 1));
        assert_eq!(Rational::parse_literal("7").unwrap(), q(7, 1));
        assert!(Rational::parse_literal("1/0").is_err());
        assert!(Rational::parse_literal("abc").is_err());
        assert!(Rational::parse_literal(".").is_err());
    }

    #[test]
    fn parse_float_forms() {
        assert_eq!(f64::parse_literal("3/8").unwrap(), 0.375);
        assert_eq!(f64::parse_literal("1e-6").unwrap(), 1e-6);
        assert!(f64::parse_literal("inf").is_err());
        let x = 0.1f64 + 0.2;
        assert_eq!(f64::parse_literal(&x.to_literal()).unwrap(), x);
    }

    #[test]
    fn floor_behaves_for_negatives() {
        assert_eq!(Scalar::floor(&q(-3, 10)), q(-1, 1));
        assert_eq!(Scalar::floor(&q(23, 1)), q(23, 1));
        assert_eq!(Scalar::floor(&-0.3f64), -1.0);
    }

    #[test]
    fn mode_round_trips() {
        assert_eq!("rational".parse::<Mode>().unwrap(), Mode::Rational);
        assert_eq!("float64".parse::<Mode>().unwrap(), Mode::Float64);
        assert!("decimal".parse::<Mode>().is_err());
        assert_eq!(<Rational as Scalar>::MODE.to_string(), "rational");
    }
}
