//! Exact rationals.
//!
//! Everything numeric in this crate is a [`Rat`], an arbitrary precision
//! fraction kept in lowest terms with a positive denominator.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Parses `p/q` or `p`. A zero denominator is an error.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let t = text.trim();
    let bad = || Error::InvalidRational(text.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(BigInt::from_str(t).map_err(|_| bad())?)),
    }
}

/// `p/q`, or `p` when the denominator is one.
pub fn fmt_rat(value: &Rat) -> String {
    value.to_string()
}

pub fn max_rat<'a>(values: impl IntoIterator<Item = &'a Rat>) -> Option<Rat> {
    values.into_iter().max().cloned()
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales every value by the common denominator and returns the integer
/// numerators if they all fit comfortably in an `i64` (with headroom for
/// summing a few hundred of them).
pub fn scaled_integers(values: &[Rat]) -> Option<(Vec<i64>, BigInt)> {
    let denom = common_denominator(values);
    let limit = BigInt::from(1i64 << 52);
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        let scaled = v.numer() * (&denom / v.denom());
        if scaled.abs() >= limit {
            return None;
        }
        out.push(i64::try_from(scaled).ok()?);
    }
    Some((out, denom))
}

pub fn is_nonnegative(value: &Rat) -> bool {
    !value.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("-4").unwrap(), int(-4));
        assert_eq!(parse_rat(" 2/-4 ").unwrap(), rat(-1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt_rat(&rat(3, 2)), "3/2");
        assert_eq!(fmt_rat(&int(2)), "2");
        assert_eq!(fmt_rat(&rat(-1, 4)), "-1/4");
    }

    #[test]
    fn scaling() {
        let (ints, d) = scaled_integers(&[rat(1, 2), rat(1, 3), int(2)]).unwrap();
        assert_eq!(d, BigInt::from(6));
        assert_eq!(ints, vec![3, 2, 12]);
    }
}
