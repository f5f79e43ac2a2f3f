use std::cmp::Ordering;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::interval::RationalInterval;
use super::spec::{AlphaSpec, GrowthRule};
use crate::error::{Error, Result};
use crate::fixed::Fixed;

pub const DEFAULT_MAX_DEPTH: usize = 200;
pub const PRECISION_CAP_ENV: &str = "COCYCLE_LAB_PRECISION_CAP";

/// Largest `a_n` index the rule specs will evaluate (`n!` and `2^n` grow past any budget).
const RULE_INDEX_LIMIT: usize = 100_000;

#[derive(Debug, Default)]
struct Cache {
    /// `quotients[i] = a_{i+1}`.
    quotients: Vec<BigUint>,
    /// Sparse index set `j(0) < j(1) < ...` computed so far.
    sparse_index: Vec<usize>,
    /// `p[i] = p_{i-1}`, `q[i] = q_{i-1}`.
    p: Vec<BigInt>,
    q: Vec<BigInt>,
}

/// Lazily expanded continued fraction `α = [0; a_1, a_2, ...]`.
///
/// Quotients and convergents are memoized behind a lock; fills are idempotent, so
/// concurrent readers only ever see complete entries.
#[derive(Debug)]
pub struct AlphaHandle {
    spec: AlphaSpec,
    max_depth: usize,
    cache: RwLock<Cache>,
    fixed: OnceLock<Fixed>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormValue {
    #[serde(serialize_with = "crate::serde_util::bigint_str")]
    pub k: BigInt,
    pub enclosure: RationalInterval,
    pub depth: usize,
}

impl Clone for AlphaHandle {
    fn clone(&self) -> Self {
        AlphaHandle::with_max_depth(self.spec.clone(), self.max_depth)
    }
}

impl AlphaHandle {
    /// Handle with the depth cap taken from `COCYCLE_LAB_PRECISION_CAP` (default 200).
    pub fn new(spec: AlphaSpec) -> Self {
        let cap = std::env::var(PRECISION_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_DEPTH);
        Self::with_max_depth(spec, cap)
    }

    pub fn with_max_depth(spec: AlphaSpec, max_depth: usize) -> Self {
        let cache = Cache {
            p: vec![BigInt::one(), BigInt::zero()],
            q: vec![BigInt::zero(), BigInt::one()],
            ..Cache::default()
        };
        AlphaHandle { spec, max_depth: max_depth.max(2), cache: RwLock::new(cache), fixed: OnceLock::new() }
    }

    pub fn golden() -> Self {
        Self::new(AlphaSpec::golden())
    }

    pub fn spec(&self) -> &AlphaSpec {
        &self.spec
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Number of convergents cached beyond `n = 0`.
    pub fn depth_reached(&self) -> usize {
        self.cache.read().unwrap().p.len() - 2
    }

    /// `a_n` for `n >= 1`.
    pub fn partial_quotient(&self, n: usize) -> Result<BigUint> {
        if n == 0 {
            return Err(Error::InvalidArgument("partial quotients are indexed from 1".into()));
        }
        {
            let c = self.cache.read().unwrap();
            if let Some(a) = c.quotients.get(n - 1) {
                return Ok(a.clone());
            }
        }
        let mut c = self.cache.write().unwrap();
        self.fill_quotients(&mut c, n)?;
        Ok(c.quotients[n - 1].clone())
    }

    fn fill_quotients(&self, c: &mut Cache, n: usize) -> Result<()> {
        while c.quotients.len() < n {
            let idx = c.quotients.len() + 1;
            let a = self.compute_quotient(c, idx)?;
            c.quotients.push(a);
        }
        Ok(())
    }

    fn compute_quotient(&self, c: &mut Cache, n: usize) -> Result<BigUint> {
        match &self.spec {
            AlphaSpec::Explicit(v) => {
                v.get(n - 1).cloned().ok_or(Error::IndexBeyondSpec { index: n, len: v.len() })
            }
            AlphaSpec::Periodic { preperiod, period } => Ok(if n <= preperiod.len() {
                preperiod[n - 1].clone()
            } else {
                period[(n - 1 - preperiod.len()) % period.len()].clone()
            }),
            AlphaSpec::Rule(rule) => {
                if n > RULE_INDEX_LIMIT {
                    return Err(Error::precision(format!("a_{n} of {} exceeds the evaluation budget", self.spec)));
                }
                Ok(match rule {
                    GrowthRule::Factorial => (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i),
                    GrowthRule::Pow2 => BigUint::one() << n,
                })
            }
            AlphaSpec::Sparse(rule) => {
                while c.sparse_index.last().map_or(true, |&j| j < n) {
                    let k = c.sparse_index.len() as u64;
                    let j = rule.index.eval(k)?;
                    let j = j.to_usize().ok_or_else(|| Error::InvalidSpec(format!("sparse index j({k}) = {j} out of range")))?;
                    let prev = c.sparse_index.last().copied().unwrap_or(0);
                    if j <= prev {
                        return Err(Error::InvalidSpec(format!(
                            "sparse indices must satisfy 1 <= j(0) < j(1) < ...; got j({k}) = {j} after {prev}"
                        )));
                    }
                    c.sparse_index.push(j);
                }
                match c.sparse_index.binary_search(&n) {
                    Ok(k) => {
                        let v = rule.value.eval(k as u64)?;
                        match v.to_biguint() {
                            Some(v) if !v.is_zero() => Ok(v),
                            _ => Err(Error::InvalidSpec(format!("sparse value a_j({k}) = {v} must be >= 1"))),
                        }
                    }
                    Err(_) => Ok(rule.filler.clone()),
                }
            }
        }
    }

    /// Sparse index `j(k)` for sparse specs.
    pub fn sparse_index(&self, k: usize) -> Result<usize> {
        let AlphaSpec::Sparse(rule) = &self.spec else {
            return Err(Error::InvalidPlan(format!("{} is not a sparse spec", self.spec)));
        };
        {
            let c = self.cache.read().unwrap();
            if let Some(&j) = c.sparse_index.get(k) {
                return Ok(j);
            }
        }
        let j = rule.index.eval(k as u64)?;
        let j = j.to_usize().ok_or_else(|| Error::InvalidPlan(format!("sparse index j({k}) = {j} out of range")))?;
        // Filling quotients up to j also validates monotonicity of the index set.
        self.partial_quotient(j)?;
        let c = self.cache.read().unwrap();
        c.sparse_index.get(k).copied().ok_or_else(|| Error::InvalidPlan(format!("sparse index j({k}) unavailable")))
    }

    /// `(p_n, q_n)` for `n >= -1`.
    pub fn convergent(&self, n: isize) -> Result<(BigInt, BigInt)> {
        if n < -1 {
            return Err(Error::InvalidArgument(format!("convergent index {n} < -1")));
        }
        let i = (n + 1) as usize;
        {
            let c = self.cache.read().unwrap();
            if i < c.p.len() {
                return Ok((c.p[i].clone(), c.q[i].clone()));
            }
        }
        let mut c = self.cache.write().unwrap();
        self.fill_quotients(&mut c, n as usize)?;
        while c.p.len() <= i {
            let m = c.p.len();
            let a = BigInt::from(c.quotients[m - 2].clone());
            let p = &a * &c.p[m - 1] + &c.p[m - 2];
            let q = &a * &c.q[m - 1] + &c.q[m - 2];
            c.p.push(p);
            c.q.push(q);
        }
        Ok((c.p[i].clone(), c.q[i].clone()))
    }

    pub fn q(&self, n: usize) -> Result<BigInt> {
        Ok(self.convergent(n as isize)?.1)
    }

    /// `q_n` as `u64`, or `None` when it overflows.
    pub fn q_u64(&self, n: usize) -> Result<Option<u64>> {
        Ok(self.q(n)?.to_u64())
    }

    /// Largest `n` with `q_n <= bound` (at least 0).
    pub fn last_index_with_q_at_most(&self, bound: &BigInt) -> Result<usize> {
        let mut n = 0;
        while self.q(n + 1)? <= *bound {
            n += 1;
            if n > self.max_depth {
                return Err(Error::precision(format!("q_n <= {bound} beyond depth cap {}", self.max_depth)));
            }
        }
        Ok(n)
    }

    /// Interval between `p_d/q_d` and `p_{d+1}/q_{d+1}`, which contains α.
    pub fn enclosure(&self, depth: usize) -> Result<RationalInterval> {
        if depth == 0 {
            return Err(Error::InvalidArgument("enclosure depth must be >= 1".into()));
        }
        let (p0, q0) = self.convergent(depth as isize)?;
        let (p1, q1) = self.convergent(depth as isize + 1)?;
        Ok(RationalInterval::spanning(BigRational::new(p0, q0), BigRational::new(p1, q1)))
    }

    /// Smallest `d >= 1` with `q_d q_{d+1} >= bound`, respecting the depth cap.
    pub fn depth_for_product(&self, bound: &BigInt, what: &str) -> Result<usize> {
        let mut d = 1;
        loop {
            if d > self.max_depth {
                return Err(Error::precision(format!("{what} (depth cap {} reached)", self.max_depth)));
            }
            match (self.q(d), self.q(d + 1)) {
                (Ok(a), Ok(b)) => {
                    if a * b >= *bound {
                        return Ok(d);
                    }
                    d += 1;
                }
                (Err(Error::IndexBeyondSpec { .. }), _) | (_, Err(Error::IndexBeyondSpec { .. })) => {
                    return Err(Error::precision(format!("{what} (spec {} exhausted at depth {d})", self.spec)));
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
    }

    /// Enclosure of `r + m α` (not reduced mod 1).
    pub fn lattice_enclosure(&self, r: &BigRational, m: &BigInt, depth: usize) -> Result<RationalInterval> {
        if m.is_zero() {
            return Ok(RationalInterval::point(r.clone()));
        }
        Ok(self.enclosure(depth)?.scale(m).shift(r))
    }

    fn start_depth(&self, m: &BigInt) -> Result<usize> {
        // Fine enough that |m|·width < 1 from the outset; avoids dozens of useless rounds.
        let bound = m.abs();
        match self.depth_for_product(&bound, "starting depth") {
            Ok(d) => Ok(d),
            Err(_) => Ok(1),
        }
    }

    /// `r + mα` in f64 with an error bound, for `|r|, |m| <= 2^32`. Each of the three
    /// roundings costs at most `(|r| + |m|)·2^-53`, far below the `2^-16` returned.
    fn float_estimate(&self, r: &BigRational, m: &BigInt) -> Option<(f64, f64)> {
        const SMALL: f64 = 4_294_967_296.0;
        let mf = m.to_i64()? as f64;
        let rf = r.to_f64()?;
        if mf.abs() > SMALL || !(rf.abs() <= SMALL) {
            return None;
        }
        let a = self.fixed_alpha().ok()?.to_f64();
        Some((rf + mf * a, 1.0 / 65_536.0))
    }

    /// Sign of `r + m α`. Exact: the value is nonzero whenever `m != 0`.
    pub fn sign_of(&self, r: &BigRational, m: &BigInt) -> Result<Ordering> {
        if m.is_zero() {
            return Ok(r.cmp(&BigRational::zero()));
        }
        if let Some((v, e)) = self.float_estimate(r, m) {
            if v.abs() > e {
                return Ok(if v > 0.0 { Ordering::Greater } else { Ordering::Less });
            }
        }
        let mut d = self.start_depth(m)?;
        loop {
            let enc = self.lattice_enclosure(r, m, d).map_err(|e| self.refine_err(e, "sign of r + m*alpha"))?;
            if enc.is_positive() {
                return Ok(Ordering::Greater);
            }
            if enc.is_negative() {
                return Ok(Ordering::Less);
            }
            d += 1;
            if d > self.max_depth {
                return Err(Error::precision(format!("sign of {r} + {m}*alpha (depth cap {})", self.max_depth)));
            }
        }
    }

    /// `floor(r + m α)`.
    pub fn floor_of(&self, r: &BigRational, m: &BigInt) -> Result<BigInt> {
        if m.is_zero() {
            return Ok(r.floor().to_integer());
        }
        if let Some((v, e)) = self.float_estimate(r, m) {
            let f = v.floor();
            if v - f > e && f + 1.0 - v > e {
                return Ok(BigInt::from(f as i64));
            }
        }
        let mut d = self.start_depth(m)?;
        loop {
            let enc = self.lattice_enclosure(r, m, d).map_err(|e| self.refine_err(e, "floor of r + m*alpha"))?;
            let lo = enc.lo().floor();
            // Irrational values never sit on an integer, so equal floors of a closed
            // enclosure with non-integer upper end settle the question.
            if lo == enc.hi().floor() && !enc.hi().is_integer() {
                return Ok(lo.to_integer());
            }
            d += 1;
            if d > self.max_depth {
                return Err(Error::precision(format!("floor of {r} + {m}*alpha (depth cap {})", self.max_depth)));
            }
        }
    }

    fn refine_err(&self, e: Error, what: &str) -> Error {
        match e {
            Error::IndexBeyondSpec { .. } => Error::precision(format!("{what}: spec {} exhausted", self.spec)),
            other => other,
        }
    }

    /// Enclosure of `‖kα‖` of width at most `target_width`.
    pub fn norm_k_alpha(&self, k: &BigInt, target_width: &BigRational) -> Result<NormValue> {
        if k.is_zero() {
            return Err(Error::InvalidArgument("norm_k_alpha needs k != 0".into()));
        }
        if !target_width.is_positive() {
            return Err(Error::InvalidArgument("target width must be positive".into()));
        }
        let ka = k.abs();
        // the depth-d enclosure of kα has width |k|/(q_d q_{d+1})
        let need = (BigRational::from_integer(ka.clone()) / target_width).ceil().to_integer();
        let mut d = self.depth_for_product(&need, "norm of k*alpha").unwrap_or(1);
        loop {
            let enc = self.enclosure(d).map_err(|e| self.refine_err(e, "norm of k*alpha"))?;
            let scaled = enc.scale(&ka);
            if &scaled.width() <= target_width {
                return Ok(NormValue { k: k.clone(), enclosure: scaled.dist_to_integer(), depth: d });
            }
            d += 1;
            if d > self.max_depth {
                return Err(Error::precision(format!("norm of {k}*alpha to width {target_width} (depth cap {})", self.max_depth)));
            }
        }
    }

    /// Max of `a_1..a_horizon`.
    pub fn observed_partial_quotient_max(&self, horizon: usize) -> Result<BigUint> {
        if horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be >= 1".into()));
        }
        let mut best = BigUint::zero();
        for n in 1..=horizon {
            best = best.max(self.partial_quotient(n)?);
        }
        Ok(best)
    }

    /// α as a 128-bit binary fraction, error at most 2 ulps.
    pub fn fixed_alpha(&self) -> Result<Fixed> {
        if let Some(f) = self.fixed.get() {
            return Ok(*f);
        }
        let f = self.fixed_of(&BigRational::zero(), &BigInt::one())?;
        Ok(*self.fixed.get_or_init(|| f))
    }

    /// `{r + m α}` as a fixed-point fraction with error at most 2 ulps.
    pub fn fixed_of(&self, r: &BigRational, m: &BigInt) -> Result<Fixed> {
        if m.is_zero() {
            return Ok(Fixed::from_rational(r));
        }
        let bound = m.abs() << 130u32;
        let d = self.depth_for_product(&bound, "fixed-point image of a lattice point")?;
        let (p, q) = self.convergent(d as isize)?;
        let approx = r + BigRational::new(m * p, q);
        let mut f = Fixed::from_rational(&approx);
        f.err = 2;
        Ok(f)
    }

    /// Overwrites a cached `q_n` (test hook for fault-injection checks).
    #[doc(hidden)]
    pub fn inject_convergent_fault(&self, n: usize) -> Result<()> {
        self.convergent(n as isize)?;
        let mut c = self.cache.write().unwrap();
        c.q[n + 1] += 1;
        Ok(())
    }

    /// Checks the recurrence and determinant identity for `0 <= n <= up_to` against the cache.
    pub fn verify_cache(&self, up_to: usize) -> Result<std::result::Result<(), String>> {
        self.convergent(up_to as isize)?;
        let c = self.cache.read().unwrap();
        for n in 0..=up_to {
            let i = n + 1;
            if n >= 1 {
                let a = BigInt::from(c.quotients[n - 1].clone());
                if c.p[i] != &a * &c.p[i - 1] + &c.p[i - 2] || c.q[i] != &a * &c.q[i - 1] + &c.q[i - 2] {
                    return Ok(Err(format!("recurrence fails at n = {n}")));
                }
            }
            let det = &c.p[i - 1] * &c.q[i] - &c.p[i] * &c.q[i - 1];
            let want = if n.is_even() { BigInt::one() } else { -BigInt::one() };
            if det != want {
                return Ok(Err(format!("determinant identity fails at n = {n}: got {det}, want {want}")));
            }
        }
        Ok(Ok(()))
    }
}
