//! Exact numbers serialize as decimal strings so no consumer ever sees a rounded value.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serializer;

pub fn bigint_str<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn biguint_str<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn rational_str<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn bigint_vec<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

pub fn biguint_vec<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

pub fn rational_vec<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Truncated decimal expansion with `digits` fractional digits.
pub fn rational_to_decimal(v: &BigRational, digits: usize) -> String {
    let neg = v.is_negative();
    let a = v.abs();
    let (int, rem) = a.numer().div_rem(a.denom());
    let scale = num_traits::pow(BigInt::from(10), digits);
    let frac = (rem * &scale) / a.denom();
    let mut s = format!("{}{}.{:0>width$}", if neg { "-" } else { "" }, int, frac.to_string(), width = digits);
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    if frac.is_zero() {
        s = format!("{}{}.0", if neg { "-" } else { "" }, int);
    }
    s
}
