//! 128-bit fixed-point circle arithmetic for hot loops.
//!
//! A value `v` stands for `v / 2^128` in `[0, 1)`; `err` bounds the distance (in ulps,
//! measured on the circle) to the exact point it approximates. Every decision taken
//! from a `Fixed` checks its margin against `err` and reports `None` when it cannot
//! decide, so callers can fall back to exact arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixed {
    pub v: u128,
    pub err: u128,
}

const TWO_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

impl Fixed {
    pub const ZERO: Fixed = Fixed { v: 0, err: 0 };

    /// `{r}` rounded down to a multiple of `2^-128`.
    pub fn from_rational(r: &BigRational) -> Fixed {
        let frac = r - r.floor();
        let scaled: BigInt = frac.numer() << 128u32;
        let (v, rem) = scaled.div_rem(frac.denom());
        Fixed { v: v.to_u128().unwrap_or(u128::MAX), err: if rem.is_zero() { 0 } else { 1 } }
    }

    pub fn from_f64(x: f64) -> Fixed {
        let f = x - x.floor();
        Fixed { v: (f * TWO_128) as u128, err: 1u128 << 76 }
    }

    pub fn to_f64(self) -> f64 {
        self.v as f64 / TWO_128
    }

    pub fn add(self, o: Fixed) -> Fixed {
        Fixed { v: self.v.wrapping_add(o.v), err: self.err.saturating_add(o.err) }
    }

    pub fn sub(self, o: Fixed) -> Fixed {
        Fixed { v: self.v.wrapping_sub(o.v), err: self.err.saturating_add(o.err) }
    }

    pub fn neg(self) -> Fixed {
        Fixed { v: self.v.wrapping_neg(), err: self.err }
    }

    /// `k · self` on the circle.
    pub fn mul_int(self, k: i128) -> Fixed {
        let v = self.v.wrapping_mul(k as u128);
        Fixed { v, err: self.err.saturating_mul(k.unsigned_abs()) }
    }

    /// `‖self‖` as a float (distance to the nearest integer).
    pub fn norm_f64(self) -> f64 {
        let d = self.v.min(self.v.wrapping_neg());
        d as f64 / TWO_128
    }

    /// Lower and upper bounds of `‖self‖` as floats, widened by `err`.
    pub fn norm_bounds_f64(self) -> (f64, f64) {
        let d = self.v.min(self.v.wrapping_neg());
        let lo = d.saturating_sub(self.err);
        let hi = d.saturating_add(self.err).min(1u128 << 127);
        // Directed widening by one float ulp keeps the bounds honest after conversion.
        let lo = (lo as f64 / TWO_128) * (1.0 - f64::EPSILON);
        let hi = (hi as f64 / TWO_128) * (1.0 + f64::EPSILON);
        (lo, hi)
    }
}

/// Decides `x ∈ [start, start + len)` on the circle, or `None` if the margins
/// do not exceed the combined error.
#[inline]
pub fn in_arc(x: Fixed, start: Fixed, len: Fixed) -> Option<bool> {
    let t = x.v.wrapping_sub(start.v);
    let et = x.err.saturating_add(start.err);
    // x too close to the arc start (from either side)
    if t <= et || t.wrapping_neg() <= et {
        return None;
    }
    let el = len.err;
    let margin = et.saturating_add(el);
    let gap = if t > len.v { t - len.v } else { len.v - t };
    if gap <= margin {
        return None;
    }
    Some(t < len.v)
}
