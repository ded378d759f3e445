//! Exact rationals and the small helpers every module leans on.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// 2^k as an exact rational.
pub fn pow2(k: usize) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

/// 2^-k as an exact rational.
pub fn pow2_neg(k: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// 2^e for a signed exponent.
pub fn pow2_signed(e: i64) -> Rational {
    if e >= 0 {
        pow2(e as usize)
    } else {
        pow2_neg((-e) as usize)
    }
}

pub fn pow(base: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::one(), |acc, _| acc * base)
}

/// Parses `"n"` or `"n/d"`.
pub fn parse(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidRational(s.to_string());
    let t = s.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => t.parse::<BigInt>().map(Rational::from_integer).map_err(|_| bad()),
    }
}

/// `num/den` in lowest terms; integers print without a denominator.
pub fn format(r: &Rational) -> String {
    r.to_string()
}

/// Denominator is a power of two.
pub fn is_dyadic(r: &Rational) -> bool {
    let d = r.denom();
    let d_minus_1: BigInt = d - BigInt::one();
    (d & &d_minus_1).is_zero()
}

/// For a dyadic rational, the exponent t with denominator 2^t.
pub fn dyadic_exponent(r: &Rational) -> Option<usize> {
    is_dyadic(r).then(|| r.denom().bits() as usize - 1)
}

/// The least integer m with 2^-m <= x, i.e. ceil(-log2 x), for x > 0.
pub fn ceil_neg_log2(x: &Rational) -> i64 {
    assert!(x.is_positive(), "ceil_neg_log2 of a non-positive value");
    // Start from a bit-length estimate and correct in both directions.
    let est = x.denom().bits() as i64 - x.numer().bits() as i64;
    let mut m = est;
    while pow2_signed(-m) > *x {
        m += 1;
    }
    while pow2_signed(-(m - 1)) <= *x {
        m -= 1;
    }
    m
}

/// Decimal rendering truncated to `digits` fractional digits, computed by
/// integer long division. For display alongside the exact form only.
pub fn decimal(r: &Rational, digits: usize) -> String {
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();
    let (whole, mut rem) = num.div_rem(&den);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if digits > 0 {
        out.push('.');
        let ten = BigInt::from(10);
        for _ in 0..digits {
            rem *= &ten;
            let (q, r2) = rem.div_rem(&den);
            out.push_str(&q.to_string());
            rem = r2;
        }
    }
    out
}

pub fn min(a: Rational, b: Rational) -> Rational {
    if a <= b {
        a
    } else {
        b
    }
}

/// Serde adapter storing a rational as its `num/den` string.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for maps whose values are rationals.
pub mod serde_rational_map {
    use std::collections::BTreeMap;

    use super::*;
    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<K: Serialize, S: Serializer>(m: &BTreeMap<K, Rational>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, &format(v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, K, D>(d: D) -> Result<BTreeMap<K, Rational>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        D: Deserializer<'de>,
    {
        let raw = BTreeMap::<K, String>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| parse(&v).map(|r| (k, r)).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("6/8").unwrap(), ratio(3, 4));
        assert_eq!(format(&ratio(3, 4)), "3/4");
        assert_eq!(format(&int(1)), "1");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn neg_log2() {
        assert_eq!(ceil_neg_log2(&ratio(1, 2)), 1);
        assert_eq!(ceil_neg_log2(&ratio(1, 4)), 2);
        assert_eq!(ceil_neg_log2(&ratio(3, 8)), 2);
        assert_eq!(ceil_neg_log2(&int(1)), 0);
        assert_eq!(ceil_neg_log2(&int(4)), -2);
        assert_eq!(ceil_neg_log2(&int(3)), -1);
        assert_eq!(ceil_neg_log2(&ratio(1, 3)), 2);
    }

    #[test]
    fn dyadic() {
        assert!(is_dyadic(&ratio(3, 8)));
        assert!(is_dyadic(&int(1)));
        assert!(!is_dyadic(&ratio(1, 3)));
        assert_eq!(dyadic_exponent(&ratio(3, 8)), Some(3));
        assert_eq!(dyadic_exponent(&int(0)), Some(0));
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal(&ratio(1, 3), 4), "0.3333");
        assert_eq!(decimal(&ratio(-7, 4), 2), "-1.75");
    }
}
