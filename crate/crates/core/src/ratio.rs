//! Small rationals for exponents and weights, and the `"p/q"` string form
//! used for every rational in serialized artifacts.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Rational with machine-word parts; used for exponents, weights and indices.
pub type Q64 = Ratio<i64>;

pub fn q64(n: i64, d: i64) -> Q64 {
    Ratio::new(n, d)
}

pub fn fmt_q64(x: &Q64) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q64(s: &str) -> Result<Q64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(n, d))
        }
        None => Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_big(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_big(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Q64) -> Q64 {
    x - x.floor()
}

/// `x mod m` in `[0, m)` for positive `m`.
pub fn rem_euclid(x: &Q64, m: &Q64) -> Q64 {
    debug_assert!(m.is_positive());
    x - (x / m).floor() * m
}

pub fn lcm_u32(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// Serde adapter: `Q64` as a `"p/q"` string.
pub mod q64_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q64(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q64, D::Error> {
        let s = String::deserialize(d)?;
        parse_q64(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: `BigRational` as a `"p/q"` string.
pub mod big_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_big(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_big(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_strings() {
        assert_eq!(fmt_q64(&q64(6, 4)), "3/2");
        assert_eq!(fmt_q64(&q64(-4, 2)), "-2");
        assert_eq!(parse_q64(" -3/6 ").unwrap(), q64(-1, 2));
        assert!(parse_q64("1/0").is_err());
        assert!(parse_q64("0.5").is_err());
        let b = parse_big("12345678901234567890123456789/2").unwrap();
        assert_eq!(fmt_big(&b), "12345678901234567890123456789/2");
    }

    #[test]
    fn modular_reduction() {
        assert_eq!(rem_euclid(&q64(-1, 2), &q64(2, 1)), q64(3, 2));
        assert_eq!(frac(&q64(-1, 4)), q64(3, 4));
    }
}
