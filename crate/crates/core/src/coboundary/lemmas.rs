//! Validators for the tail-sum estimates and the two-part lemma on `‖kα‖` below `q_n`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::norms::{chunked_sums, down, norm_alpha_less_than, up, NormOracle, EPS};
use crate::contfrac::AlphaHandle;
use crate::error::{Error, Result};

/// Largest truncation point for the infinite tails.
pub const TAIL_CUT_CAP: u64 = 1 << 26;
/// `q_n` above which the sum below `q_n` is split into near and far residues.
pub const DIRECT_LIMIT: u64 = 1 << 22;
/// Residue window summed term by term in the split method.
pub const SPLIT_WINDOW: u64 = 4096;
/// Calibrated constant for `Σ_{k<q_n} ‖kα‖^{-2} <= C q_n²`.
pub const INVERSE_SQUARE_CONSTANT: f64 = 8.0;

#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    /// Enclosure of the computed left side (tail past the cut included in `left_hi`).
    pub left_lo: f64,
    pub left_hi: f64,
    /// Bound on the part of the left side beyond the truncation point.
    pub tail_bound: f64,
    /// The explicit right side being tested.
    pub right: f64,
    /// `left_hi / right`.
    pub ratio: f64,
    /// `left_hi / shape`, with the shape expression stated in `shape`.
    pub shape: String,
    pub shape_ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaSumReport {
    pub n_index: usize,
    #[serde(serialize_with = "crate::serde_util::bigint_str")]
    pub q_n: BigInt,
    pub p: u64,
    /// The tails `k >= q_n` are summed up to `q_cut` exclusive.
    pub cut_index: usize,
    #[serde(serialize_with = "crate::serde_util::bigint_str")]
    pub q_cut: BigInt,
    pub checks: Vec<InequalityCheck>,
}

/// Mean and variation of the two test functions used with the tail lemma.
/// Near: `1_{[−1/p, 1/p]}`; far: `x^{−2} 1_{[1/p, 1/2]}(|x|)`.
fn near_mu_v(p: u64) -> (f64, f64) {
    if p == 1 {
        (1.0, 0.0)
    } else {
        (2.0 / p as f64, 2.0)
    }
}

fn far_mu_v(p: u64) -> (f64, f64) {
    if p <= 2 {
        (0.0, 0.0)
    } else {
        let pf = p as f64;
        (2.0 * (pf - 2.0), 4.0 * pf * pf - 8.0)
    }
}

fn enclosed_sum(terms: &[(f64, f64)]) -> (f64, f64) {
    let lo: f64 = terms.iter().map(|t| t.0).sum();
    let hi: f64 = terms.iter().map(|t| t.1).sum();
    let n = terms.len() as f64;
    (lo * (1.0 - n * EPS), hi * (1.0 + n * EPS))
}

/// Decides `‖kα‖ >= 1/p` (the boundary is never attained by an irrational).
fn at_least_inv(handle: &AlphaHandle, k: u64, b: (f64, f64), p: u64) -> Result<bool> {
    let c = 1.0 / p as f64;
    if b.0 > up(c) {
        return Ok(true);
    }
    if b.1 < down(c) {
        return Ok(false);
    }
    Ok(!norm_alpha_less_than(handle, &BigInt::from(k), &BigRational::new(BigInt::one(), BigInt::from(p)))?)
}

/// Tail-sum and head-sum estimates at `q_n` for a given `p`.
///
/// Checks, each with its explicit right side:
/// - `tail-constant`: `Σ_{k>=q_n} 1/k² <= 2/q_n`;
/// - `tail-near`: `Σ_{k>=q_n, ‖kα‖<=1/p} 1/k² <= 2(μ/q_n + V/q_n²)` for `1_{[−1/p,1/p]}`;
/// - `tail-far`: `Σ_{k>=q_n, ‖kα‖>=1/p} 1/(k²‖kα‖²) <= 2(μ/q_n + V/q_n²)` for `x^{−2}1_{[1/p,1/2]}(|x|)`;
/// - `head-far`: `Σ_{0<k<q_n, ‖kα‖>=1/p} ‖kα‖^{−2} <= (π²/3) p (q_n + 2p)`.
///
/// Tails are cut at `q_cut`, the largest `q_m` with `m <= n + 6` and `q_m <= 2^26`; the
/// remainder is bounded by the tail lemma applied at `q_cut`.
pub fn lemma_sum_checks(handle: &AlphaHandle, n_index: usize, p: u64) -> Result<LemmaSumReport> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be >= 1".into()));
    }
    let qn_big = handle.q(n_index)?;
    let qn = qn_big.to_u64().filter(|&q| q <= TAIL_CUT_CAP).ok_or_else(|| Error::InvalidArgument(format!("q_{n_index} = {qn_big} beyond the summation cap")))?;
    let mut cut = n_index;
    for m in n_index + 1..=n_index + 6 {
        match handle.q(m)?.to_u64() {
            Some(q) if q <= TAIL_CUT_CAP => cut = m,
            _ => break,
        }
    }
    let q_cut_big = handle.q(cut)?;
    let qc = q_cut_big.to_u64().unwrap();
    let oracle = NormOracle::new(handle)?;

    // tails k in [q_n, q_cut)
    let cols = chunked_sums(qn, qc, |k| {
        let kk = (k as f64) * (k as f64);
        let b = oracle.alpha(k as i128)?;
        let inv = (down(1.0 / kk), up(1.0 / kk));
        let mut r = [inv, (0.0, 0.0), (0.0, 0.0)];
        if p > 1 && at_least_inv(handle, k, b, p)? {
            r[2] = (down(1.0 / (kk * b.1 * b.1)), up(1.0 / (kk * b.0 * b.0)));
        } else {
            r[1] = inv;
        }
        Ok(r)
    })?;
    let col = |i: usize| cols[i];
    let qnf = qn as f64;
    let qcf = qc as f64;
    let lemma_right = |mu: f64, v: f64, q: f64| 2.0 * (mu / q + v / (q * q));

    let mut checks = Vec::new();
    let mut push = |name: &str, (lo, hi): (f64, f64), tail: f64, right: f64, shape: &str, shape_v: f64| {
        let left_hi = up(hi + tail);
        checks.push(InequalityCheck {
            name: name.into(),
            left_lo: lo,
            left_hi,
            tail_bound: tail,
            right,
            ratio: if right > 0.0 { left_hi / right } else if left_hi == 0.0 { 0.0 } else { f64::INFINITY },
            shape: shape.into(),
            shape_ratio: if shape_v > 0.0 { left_hi / shape_v } else { 0.0 },
            holds: left_hi <= right,
        });
    };
    let tail_of = |mv: (f64, f64)| if qc > qn { up(lemma_right(mv.0, mv.1, qcf)) } else { 0.0 };
    let tail_const = if qc > qn { up(2.0 / qcf) } else { 0.0 };
    let constant_right = 2.0 / qnf;
    push("tail-constant", col(0), tail_const, constant_right, "1/q_n", 1.0 / qnf);
    let (mu, v) = near_mu_v(p);
    push("tail-near", col(1), tail_of((mu, v)), lemma_right(mu, v, qnf), "1/(q_n p) + 1/q_n^2", 1.0 / (qnf * p as f64) + 1.0 / (qnf * qnf));
    let (mu, v) = far_mu_v(p);
    let pf = p as f64;
    push("tail-far", col(2), tail_of((mu, v)), lemma_right(mu, v, qnf), "p/q_n + p^2/q_n^2", pf / qnf + pf * pf / (qnf * qnf));

    // head: 0 < k < q_n
    let [head] = chunked_sums(1, qn, |k| {
        let b = oracle.alpha(k as i128)?;
        if p > 1 && at_least_inv(handle, k, b, p)? {
            Ok([(down(1.0 / (b.1 * b.1)), up(1.0 / (b.0 * b.0)))])
        } else {
            Ok([(0.0, 0.0)])
        }
    })?;
    push("head-far", head, 0.0, PI * PI / 3.0 * pf * (qnf + 2.0 * pf), "p (q_n + p)", pf * (qnf + pf));

    Ok(LemmaSumReport { n_index, q_n: qn_big, p, cut_index: cut, q_cut: q_cut_big, checks })
}

/// One `s` of the uniqueness check: every `k = s q_n + r`, `1 <= r < q_n`, with
/// `‖kα‖ < 1/(4 q_n)`.
#[derive(Debug, Clone, Serialize)]
pub struct UniquenessRow {
    pub s: u64,
    #[serde(serialize_with = "crate::serde_util::bigint_vec")]
    pub hits: Vec<BigInt>,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma14Report {
    pub n_index: usize,
    #[serde(serialize_with = "crate::serde_util::bigint_str")]
    pub q_n: BigInt,
    /// Enclosure of `Σ_{k=1}^{q_n − 1} ‖kα‖^{−2}`.
    pub sum_lo: f64,
    pub sum_hi: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    /// `direct` or `split`.
    pub method: String,
    pub constant: f64,
    pub holds_a: bool,
    pub s_max: u64,
    pub rows: Vec<UniquenessRow>,
    pub violations_b: usize,
}

/// `p_n^{−1} mod q_n`, from the determinant identity.
fn inverse_of_p(handle: &AlphaHandle, n: usize) -> Result<BigInt> {
    let qn = handle.q(n)?;
    let (_, qm) = handle.convergent(n as isize - 1)?;
    let inv = if n % 2 == 0 { -qm } else { qm };
    Ok(inv.mod_floor(&qn))
}

/// Enclosure of `Σ_{k=1}^{q−1} ‖kα‖^{−2}` with `q = q_n`.
fn inverse_square_sum(handle: &AlphaHandle, n: usize, oracle: &NormOracle) -> Result<(f64, f64, &'static str)> {
    let q_big = handle.q(n)?;
    let q = q_big.to_u64().ok_or_else(|| Error::InvalidArgument(format!("q_{n} = {q_big} exceeds 64 bits")))?;
    if q <= 1 {
        return Ok((0.0, 0.0, "direct"));
    }
    if q <= DIRECT_LIMIT {
        let [(lo, hi)] = chunked_sums(1, q, |k| {
            let b = oracle.alpha(k as i128)?;
            Ok([(down(1.0 / (b.1 * b.1)), up(1.0 / (b.0 * b.0)))])
        })?;
        return Ok((lo, hi, "direct"));
    }
    split_sum(handle, n, oracle, SPLIT_WINDOW)
}

/// Split method: `{kα} = r/q + kθ_n/q` with `r = k p_n mod q` and `|kθ_n/q| < 1/q_{n+1}`.
/// Residues with `min(r, q − r) < R` are summed term by term; the rest are enclosed by
/// integral bounds on `Σ 1/(m ± c)²`, `c = q/q_{n+1}`.
pub fn split_sum(handle: &AlphaHandle, n: usize, oracle: &NormOracle, window: u64) -> Result<(f64, f64, &'static str)> {
    let q_big = handle.q(n)?;
    let q = q_big.to_u64().ok_or_else(|| Error::InvalidArgument("split method needs q_n < 2^64".into()))?;
    if q <= 2 * window + 2 {
        return Err(Error::InvalidArgument("split window too large for q_n".into()));
    }
    let inv = inverse_of_p(handle, n)?.to_u128().unwrap();
    let near: Vec<(f64, f64)> = (1..window)
        .flat_map(|m| [m, q - m])
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|r| {
            let k = ((r as u128 * inv) % q as u128) as i128;
            let b = oracle.alpha(k)?;
            Ok((down(1.0 / (b.1 * b.1)), up(1.0 / (b.0 * b.0))))
        })
        .collect::<Result<_>>()?;
    let (near_lo, near_hi) = enclosed_sum(&near);
    let qf = q as f64;
    let c = up(ratio_up(&q_big, &handle.q(n + 1)?));
    let big_m = ((q - 1) / 2) as f64;
    let r = window as f64;
    // Σ_{m=R}^{M} 1/(m+c)² >= 1/(R+c) − 1/(M+1+c);  Σ 1/(m−c)² <= 1/(R−c)² + 1/(R−c) − 1/(M−c)
    let far_lo = 2.0 * qf * qf * (1.0 / (r + c) - 1.0 / (big_m + 1.0 + c));
    let far_hi = 2.0 * qf * qf * (1.0 / ((r - c) * (r - c)) + 1.0 / (r - c) - 1.0 / (big_m - c));
    let (mut mid_lo, mut mid_hi) = (0.0, 0.0);
    if q % 2 == 0 {
        let e = c / qf;
        mid_lo = 1.0 / ((0.5 + e) * (0.5 + e));
        mid_hi = 1.0 / ((0.5 - e) * (0.5 - e));
    }
    Ok((down(near_lo + down(far_lo) + mid_lo), up(near_hi + up(far_hi) + mid_hi), "split"))
}

fn ratio_up(a: &BigInt, b: &BigInt) -> f64 {
    BigRational::new(a.clone(), b.clone()).to_f64().unwrap_or(1.0)
}

/// Both parts of the lemma at index `n`:
/// a) `Σ_{k=1}^{q_n−1} ‖kα‖^{−2} <= 8 q_n²` (calibrated constant);
/// b) for `1 <= s <= min(a_{n+1}, s_max)`, at most one `k = s q_n + r`, `r ∈ [1, q_n)`,
///    has `‖kα‖ < 1/(4 q_n)`, and such a `k` satisfies `4k >= q_{n+1}`.
///
/// For b), writing `{rα} = j/q_n + rθ_n/q_n` with `j = r p_n mod q_n`, any hit has
/// `min(j, q_n − j) <= 2`, so only four residues are candidates.
pub fn lemma14_check(handle: &AlphaHandle, n_index: usize, s_max: u64) -> Result<Lemma14Report> {
    let oracle = NormOracle::new(handle)?;
    let q_n = handle.q(n_index)?;
    let (sum_lo, sum_hi, method) = inverse_square_sum(handle, n_index, &oracle)?;
    let q2 = q_n.to_f64().unwrap().powi(2);
    let (ratio_lo, ratio_hi) = (down(sum_lo / q2), up(sum_hi / q2));
    let rows = uniqueness_rows(handle, n_index, s_max, candidate_hits)?;
    let violations_b = rows.iter().filter(|r| !r.ok).count();
    Ok(Lemma14Report {
        n_index,
        q_n,
        sum_lo,
        sum_hi,
        ratio_lo,
        ratio_hi,
        method: method.into(),
        constant: INVERSE_SQUARE_CONSTANT,
        holds_a: ratio_hi <= INVERSE_SQUARE_CONSTANT,
        s_max,
        rows,
        violations_b,
    })
}

pub type HitFinder = fn(&AlphaHandle, usize, u64) -> Result<Vec<BigInt>>;

pub fn uniqueness_rows(handle: &AlphaHandle, n: usize, s_max: u64, find: HitFinder) -> Result<Vec<UniquenessRow>> {
    let a = handle.partial_quotient(n + 1)?;
    let s_top = a.to_u64().map(|a| a.min(s_max)).unwrap_or(s_max);
    let q_next = handle.q(n + 1)?;
    (1..=s_top)
        .map(|s| {
            let hits = find(handle, n, s)?;
            let ok = hits.len() <= 1 && hits.iter().all(|k| k * 4 >= q_next);
            Ok(UniquenessRow { s, hits, ok })
        })
        .collect()
}

fn is_hit(handle: &AlphaHandle, k: &BigInt, q: &BigInt) -> Result<bool> {
    norm_alpha_less_than(handle, k, &BigRational::new(BigInt::one(), q * 4))
}

/// Hits among the four candidate residues.
pub fn candidate_hits(handle: &AlphaHandle, n: usize, s: u64) -> Result<Vec<BigInt>> {
    let q = handle.q(n)?;
    if q <= BigInt::one() {
        return Ok(vec![]);
    }
    let inv = inverse_of_p(handle, n)?;
    let mut rs: Vec<BigInt> = [1i64, 2, -1, -2]
        .iter()
        .map(|&j| (BigInt::from(j) * &inv).mod_floor(&q))
        .filter(|r| r.is_positive())
        .collect();
    rs.sort();
    rs.dedup();
    let mut hits = Vec::new();
    for r in rs {
        let k = &q * s + r;
        if is_hit(handle, &k, &q)? {
            hits.push(k);
        }
    }
    hits.sort();
    Ok(hits)
}

/// Hits by scanning every `r ∈ [1, q_n)`.
pub fn brute_hits(handle: &AlphaHandle, n: usize, s: u64) -> Result<Vec<BigInt>> {
    let q = handle.q(n)?;
    let qu = q.to_u64().ok_or_else(|| Error::InvalidArgument("brute scan needs q_n < 2^64".into()))?;
    let oracle = NormOracle::new(handle)?;
    let thr = 1.0 / (4.0 * qu as f64);
    let mut hits = Vec::new();
    for r in 1..qu {
        let k = s * qu + r;
        let b = oracle.alpha(k as i128)?;
        if b.0 > up(thr) {
            continue;
        }
        let kb = BigInt::from(k);
        if b.1 < down(thr) || is_hit(handle, &kb, &q)? {
            hits.push(kb);
        }
    }
    Ok(hits)
}
