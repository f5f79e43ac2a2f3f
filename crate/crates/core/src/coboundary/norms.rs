//! Float bounds on `‖kα‖` and `‖kβ‖` for series summation.
//!
//! Bounds come from the 128-bit fixed-point images and are widened by the tracked
//! error; when the fixed-point bound is too loose to separate `‖kα‖` from zero, the
//! exact convergent enclosure is used instead.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::contfrac::AlphaHandle;
use crate::error::{Error, Result};
use crate::fixed::Fixed;

pub(crate) const EPS: f64 = f64::EPSILON;

/// Lower bound of a nonnegative float quantity, one relative step down.
#[inline]
pub(crate) fn down(x: f64) -> f64 {
    x * (1.0 - 4.0 * EPS)
}

#[inline]
pub(crate) fn up(x: f64) -> f64 {
    x * (1.0 + 4.0 * EPS)
}

fn rational_bounds(r: &BigRational) -> (f64, f64) {
    let x = r.to_f64().unwrap_or(f64::NAN);
    (down(x), up(x))
}

/// Fixed-point images of α and of an optional pair of circle points.
pub struct NormOracle<'a> {
    handle: &'a AlphaHandle,
    alpha: Fixed,
}

impl<'a> NormOracle<'a> {
    pub fn new(handle: &'a AlphaHandle) -> Result<Self> {
        Ok(NormOracle { handle, alpha: handle.fixed_alpha()? })
    }

    pub fn handle(&self) -> &AlphaHandle {
        self.handle
    }

    /// Bounds `(lo, hi)` on `‖kα‖` with `lo > 0`.
    pub fn alpha(&self, k: i128) -> Result<(f64, f64)> {
        let (lo, hi) = self.alpha.mul_int(k).norm_bounds_f64();
        if lo > 0.0 && hi <= 2.0 * lo {
            return Ok((lo, hi));
        }
        let tight = self.handle.fixed_of(&BigRational::from_integer(0.into()), &BigInt::from(k))?;
        let (lo, hi) = tight.norm_bounds_f64();
        if lo > 0.0 && hi <= 2.0 * lo {
            return Ok((lo, hi));
        }
        let mut width = BigRational::new(BigInt::one(), BigInt::one() << 160u32);
        for _ in 0..8 {
            let nv = self.handle.norm_k_alpha(&BigInt::from(k), &width)?;
            let (lo, _) = rational_bounds(nv.enclosure.lo());
            let (_, hi) = rational_bounds(nv.enclosure.hi());
            if lo > 0.0 {
                return Ok((lo, hi));
            }
            width = width / (BigInt::one() << 128u32);
        }
        Err(Error::precision(format!("lower bound of ||{k} alpha||")))
    }
}

/// `‖k x‖` bounds for a point given by its fixed-point image; the lower bound may be 0.
#[inline]
pub fn point_norm(x: Fixed, k: i128) -> (f64, f64) {
    let (lo, hi) = x.mul_int(k).norm_bounds_f64();
    (lo.max(0.0), hi)
}

/// Decides `‖kα‖ < c` exactly.
pub fn norm_alpha_less_than(handle: &AlphaHandle, k: &BigInt, c: &BigRational) -> Result<bool> {
    if !c.is_positive() {
        return Ok(false);
    }
    let mut width = c / BigInt::from(4);
    loop {
        let nv = handle.norm_k_alpha(k, &width)?;
        if nv.enclosure.hi() < c {
            return Ok(true);
        }
        if nv.enclosure.lo() >= c {
            return Ok(false);
        }
        width = width / (BigInt::one() << 64u32);
    }
}

const CHUNK: u64 = 1 << 16;

/// Enclosed sums of `W` nonnegative columns over `k ∈ [from, to)`.
///
/// Chunks are summed in parallel and combined in index order, so the result does not
/// depend on the worker count.
pub(crate) fn chunked_sums<const W: usize, F>(from: u64, to: u64, f: F) -> Result<[(f64, f64); W]>
where
    F: Fn(u64) -> Result<[(f64, f64); W]> + Sync + Send,
{
    let starts: Vec<u64> = (from..to).step_by(CHUNK as usize).collect();
    let parts: Vec<[(f64, f64); W]> = starts
        .into_par_iter()
        .map(|s| {
            let mut acc = [(0.0, 0.0); W];
            for k in s..(s + CHUNK).min(to) {
                let t = f(k)?;
                for (a, x) in acc.iter_mut().zip(t) {
                    a.0 += x.0;
                    a.1 += x.1;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut acc = [(0.0, 0.0); W];
    for p in parts {
        for (a, x) in acc.iter_mut().zip(p) {
            a.0 += x.0;
            a.1 += x.1;
        }
    }
    let n = (to.saturating_sub(from)) as f64;
    for a in acc.iter_mut() {
        *a = (a.0 * (1.0 - n * EPS), a.1 * (1.0 + n * EPS));
    }
    Ok(acc)
}
