//! Exact orbit counting through floor sums.
//!
//! `#{0 <= k < n : {y + kα} < L} = Σ_k ⌊y + kα⌋ − ⌊y − L + kα⌋`, and each sum of
//! floors is evaluated with α replaced by a convergent `p/q`. The replacement is
//! certified: if no approximate point `y + k p/q` lies within `2E` of an integer,
//! where `E` bounds the approximation error, every floor is unchanged. Otherwise the
//! next convergent is tried. Each attempt costs `O(log)` big-integer operations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::circle::LatticeReal;
use crate::contfrac::AlphaHandle;
use crate::error::{Error, Result};

/// `Σ_{i=0}^{n-1} ⌊(a i + b) / m⌋` for `m > 0`, any signs of `a`, `b`.
pub fn floor_sum(n: &BigInt, m: &BigInt, a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(m.is_positive());
    if !n.is_positive() {
        return BigInt::zero();
    }
    if let (Some(n), Some(m), Some(a), Some(b)) = (n.to_i128(), m.to_i128(), a.to_i128(), b.to_i128()) {
        if let Some(v) = floor_sum_i128(n, m, a, b) {
            return BigInt::from(v);
        }
    }
    let mut ans = BigInt::zero();
    let (qa, mut a) = a.div_mod_floor(m);
    let (qb, mut b) = b.div_mod_floor(m);
    ans += n * (n - 1u32) / 2u32 * qa + n * qb;
    let mut n = n.clone();
    let mut m = m.clone();
    loop {
        if a >= m {
            let (q, r) = a.div_rem(&m);
            ans += &n * (&n - 1u32) / 2u32 * q;
            a = r;
        }
        if b >= m {
            let (q, r) = b.div_rem(&m);
            ans += &n * q;
            b = r;
        }
        let y_max = &a * &n + &b;
        if y_max < m {
            break;
        }
        let (q, r) = y_max.div_rem(&m);
        n = q;
        b = r;
        std::mem::swap(&mut m, &mut a);
    }
    ans
}

/// Same recursion in checked `i128`; `None` on overflow.
fn floor_sum_i128(n: i128, m: i128, a: i128, b: i128) -> Option<i128> {
    let tri = |n: i128| -> Option<i128> {
        let (x, y) = if n % 2 == 0 { (n / 2, n - 1) } else { (n, (n - 1) / 2) };
        x.checked_mul(y)
    };
    let (qa, mut a) = (a.div_euclid(m), a.rem_euclid(m));
    let (qb, mut b) = (b.div_euclid(m), b.rem_euclid(m));
    let mut ans = tri(n)?.checked_mul(qa)?.checked_add(n.checked_mul(qb)?)?;
    let (mut n, mut m) = (n, m);
    loop {
        if a >= m {
            ans = ans.checked_add(tri(n)?.checked_mul(a / m)?)?;
            a %= m;
        }
        if b >= m {
            ans = ans.checked_add(n.checked_mul(b / m)?)?;
            b %= m;
        }
        let y_max = a.checked_mul(n)?.checked_add(b)?;
        if y_max < m {
            return Some(ans);
        }
        n = y_max / m;
        b = y_max % m;
        std::mem::swap(&mut m, &mut a);
    }
}

/// `(A + B k) / C` for `k = 0..n`, with `C > 0`.
struct Progression {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    n: BigInt,
}

impl Progression {
    fn floor_total(&self) -> BigInt {
        floor_sum(&self.n, &self.c, &self.b, &self.a)
    }

    /// `#{k : {(A + Bk)/C} < t}` for rational `0 < t <= 1`.
    fn count_frac_below(&self, t: &BigRational) -> BigInt {
        let (tn, td) = (t.numer(), t.denom());
        let shifted = floor_sum(&self.n, &(&self.c * td), &(&self.b * td), &(&self.a * td - tn * &self.c));
        self.floor_total() - shifted
    }
}

/// `Σ_{k=0}^{n-1} ⌊r + (m + k) α⌋`, exactly. Returns the sum and the depth used.
pub fn sum_floor_orbit(handle: &AlphaHandle, y: &LatticeReal, n: u64) -> Result<(BigInt, usize)> {
    if n == 0 {
        return Ok((BigInt::zero(), 0));
    }
    let nb = BigInt::from(n);
    let spread = y.m.abs() + &nb;
    // The one k with m + k = 0 (if any) is evaluated exactly by the approximation too;
    // only the guard needs to skip it.
    let k0 = -&y.m;
    let has_k0 = !k0.is_negative() && k0 < nb;
    let r_frac = &y.r - y.r.floor();

    let target = &spread * &nb * BigInt::from(1u32 << 8);
    let mut d = handle.depth_for_product(&target, "orbit floor sum").unwrap_or(1);
    loop {
        if d > handle.max_depth() {
            return Err(Error::precision(format!("orbit floor sum for {y} over {n} steps (depth cap {})", handle.max_depth())));
        }
        let conv = handle.convergent(d as isize).and_then(|c| Ok((c, handle.q(d + 1)?)));
        let ((p, q), q_next) = match conv {
            Ok(v) => v,
            Err(Error::IndexBeyondSpec { .. }) => {
                return Err(Error::precision(format!("orbit floor sum: spec {} exhausted at depth {d}", handle.spec())))
            }
            Err(e) => return Err(e),
        };
        let e2 = BigRational::new(BigInt::from(2) * &spread, &q * &q_next);
        if e2 >= BigRational::new(BigInt::one(), BigInt::from(4)) {
            d += 1;
            continue;
        }
        let (rn, rd) = (y.r.numer(), y.r.denom());
        let prog = Progression { a: rn * &q + &y.m * &p * rd, b: &p * rd, c: rd * &q, n: nb.clone() };
        let mut low = prog.count_frac_below(&e2);
        let mut high = prog.count_frac_below(&(BigRational::one() - &e2));
        let mut expected_high = nb.clone();
        if has_k0 {
            if r_frac < e2 {
                low -= 1;
            }
            if r_frac < BigRational::one() - &e2 {
                high -= 1;
            }
            expected_high -= 1;
        }
        if low.is_zero() && high == expected_high {
            return Ok((prog.floor_total(), d));
        }
        d += 1;
    }
}

/// `#{0 <= k < n : {x + kα} ∈ [0, L)}` for `x` and `L` real lattice values, `0 < L < 1`.
pub fn count_in_initial_arc(handle: &AlphaHandle, x: &LatticeReal, len: &LatticeReal, n: u64) -> Result<(u64, usize)> {
    let (a, d1) = sum_floor_orbit(handle, x, n)?;
    let (b, d2) = sum_floor_orbit(handle, &x.sub(len), n)?;
    let c = a - b;
    let c: u64 = c.try_into().map_err(|_| Error::InvalidArgument("orbit count out of range".into()))?;
    Ok((c, d1.max(d2)))
}
