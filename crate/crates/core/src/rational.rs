//! Exact rational helpers. `Q` is an arbitrary-precision rational; every
//! external representation is a `"p/q"` string (or `"p"` for integers).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// `n/d` as a rational. Panics on a zero denominator.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qu(n: u64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn floor_int(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_int(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

/// Floor of `x` as u64; `x` must be in range.
pub fn floor_u64(x: &Q) -> u64 {
    floor_int(x).to_u64().expect("value out of u64 range")
}

pub fn ceil_u64(x: &Q) -> u64 {
    ceil_int(x).to_u64().expect("value out of u64 range")
}

/// ⌈log2 n⌉ for n ≥ 1.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1, "ceil_log2 of zero");
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Width of a fixed-size field holding values in `0..=max`: ⌈log2(max+1)⌉.
pub fn width_for(max: u64) -> u32 {
    ceil_log2(max + 1)
}

pub fn next_pow2(n: u64) -> u64 {
    n.max(1).next_power_of_two()
}

/// ⌈log2(1/x)⌉ for 0 < x ≤ 1.
pub fn ceil_log2_inv(x: &Q) -> u32 {
    assert!(x.is_positive() && *x <= Q::one());
    let inv = x.recip();
    let mut k = 0u32;
    let mut p = Q::one();
    while p < inv {
        p *= qi(2);
        k += 1;
    }
    k
}

/// log2(1/x) as a float, for reporting only.
pub fn log2_inv_f64(x: &Q) -> f64 {
    let n = x.numer().to_f64().unwrap_or(f64::NAN);
    let d = x.denom().to_f64().unwrap_or(f64::NAN);
    (d / n).log2()
}

pub fn to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn lcm_u64(a: u64, b: u64) -> Option<u64> {
    let g = a.gcd(&b);
    (a / g).checked_mul(b)
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

/// Serde adapter: a single rational as a string.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: a list of rationals as strings.
pub mod serde_qvec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&fmt_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_q(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
