//! Exact rational helpers on top of `num-rational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Q = BigRational;

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    // `BigRational::to_f64` rounds correctly even when numerator and
    // denominator individually overflow f64.
    x.to_f64().unwrap_or_else(|| {
        let sign = if x.is_negative() { -1.0 } else { 1.0 };
        sign * f64::INFINITY
    })
}

/// The exact value of a finite `f64`.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

/// `base^exp` for a nonnegative integer exponent.
pub fn pow(base: &Q, exp: u32) -> Q {
    num_traits::pow(base.clone(), exp as usize)
}

/// ⌈x⌉ as a BigInt.
pub fn ceil(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn floor(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn half() -> Q {
    frac(1, 2)
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// Least common multiple of the denominators of `xs` (1 when empty).
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Serializes as `["num","den"]` so JSON never carries lossy floats.
pub fn ser<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    [x.numer().to_string(), x.denom().to_string()].serialize(s)
}

pub fn de<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
    let [n, den] = <[String; 2]>::deserialize(d)?;
    let n: BigInt = n.parse().map_err(serde::de::Error::custom)?;
    let den: BigInt = den.parse().map_err(serde::de::Error::custom)?;
    if den.is_zero() {
        return Err(serde::de::Error::custom("zero denominator"));
    }
    Ok(Q::new(n, den))
}

pub mod vec {
    use super::*;

    pub fn ser<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<[String; 2]> = xs
            .iter()
            .map(|x| [x.numer().to_string(), x.denom().to_string()])
            .collect();
        v.serialize(s)
    }

    pub fn de<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<[String; 2]>::deserialize(d)?;
        v.into_iter()
            .map(|[n, den]| {
                let n: BigInt = n.parse().map_err(serde::de::Error::custom)?;
                let den: BigInt = den.parse().map_err(serde::de::Error::custom)?;
                if den.is_zero() {
                    return Err(serde::de::Error::custom("zero denominator"));
                }
                Ok(Q::new(n, den))
            })
            .collect()
    }
}
