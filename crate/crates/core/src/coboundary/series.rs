//! Partial sums of the coboundary criterion series and of the appendix majorant
//! series, with float enclosures of every term.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::norms::{down, norm_alpha_less_than, point_norm, up, NormOracle, EPS};
use crate::circle::CirclePoint;
use crate::contfrac::AlphaHandle;
use crate::error::{Error, Result};
use crate::ostrowski::OstrowskiDigits;

const VERDICT: &str = "partial sums reported; convergence is not decided by a finite run";

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub series_id: String,
    pub cutoffs: Vec<u64>,
    /// Midpoints of the partial-sum enclosures.
    pub partial_sums: Vec<f64>,
    pub partial_sums_lo: Vec<f64>,
    pub partial_sums_hi: Vec<f64>,
    pub enclosure_widths: Vec<f64>,
    /// Whether the enclosures allow a nondecreasing sequence (always true for
    /// nonnegative terms; recorded as a self-check).
    pub monotone: bool,
    pub verdict: String,
}

/// `S_{2N} − S_N` enclosed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CauchyGap {
    pub n: u64,
    pub lo: f64,
    pub hi: f64,
}

impl SeriesReport {
    fn from_terms(id: &str, terms: &[(f64, f64)], cutoffs: &[u64]) -> Self {
        let mut lo_s = Vec::with_capacity(cutoffs.len());
        let mut hi_s = Vec::with_capacity(cutoffs.len());
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut next = 0;
        for (i, &(a, b)) in terms.iter().enumerate() {
            // terms are nonnegative, so the previous lower bound stays valid
            lo = ((lo + a) * (1.0 - EPS)).max(lo);
            hi = (hi + b) * (1.0 + EPS);
            while next < cutoffs.len() && cutoffs[next] == (i + 1) as u64 {
                lo_s.push(lo);
                hi_s.push(hi);
                next += 1;
            }
        }
        while lo_s.len() < cutoffs.len() {
            lo_s.push(lo);
            hi_s.push(hi);
        }
        let monotone = hi_s.windows(2).all(|w| w[1] >= w[0]) && lo_s.windows(2).all(|w| w[1] >= w[0]);
        SeriesReport {
            series_id: id.to_string(),
            cutoffs: cutoffs.to_vec(),
            partial_sums: lo_s.iter().zip(&hi_s).map(|(a, b)| 0.5 * (a + b)).collect(),
            enclosure_widths: lo_s.iter().zip(&hi_s).map(|(a, b)| b - a).collect(),
            partial_sums_lo: lo_s,
            partial_sums_hi: hi_s,
            monotone,
            verdict: VERDICT.to_string(),
        }
    }

    /// Enclosure of the partial sum at an exact cutoff.
    pub fn at(&self, cutoff: u64) -> Option<(f64, f64)> {
        let i = self.cutoffs.iter().position(|&c| c == cutoff)?;
        Some((self.partial_sums_lo[i], self.partial_sums_hi[i]))
    }

    /// Enclosures of `S_{2N} − S_N` for each requested `N`.
    pub fn cauchy_gaps(&self, ns: &[u64]) -> Result<Vec<CauchyGap>> {
        ns.iter()
            .map(|&n| {
                let (a_lo, a_hi) = self.at(n).ok_or_else(|| Error::InvalidArgument(format!("cutoff {n} not reported")))?;
                let (b_lo, b_hi) = self.at(2 * n).ok_or_else(|| Error::InvalidArgument(format!("cutoff {} not reported", 2 * n)))?;
                Ok(CauchyGap { n, lo: (b_lo - a_hi).max(0.0), hi: b_hi - a_lo })
            })
            .collect()
    }
}

/// Whether a sequence of gaps is strictly decreasing, decided on the enclosures.
pub fn gaps_decreasing(gaps: &[CauchyGap]) -> bool {
    gaps.windows(2).all(|w| w[1].hi < w[0].lo)
}

/// `{10^i, 2·10^i} ∩ [1, K]` together with `K`.
pub fn standard_cutoffs(k_max: u64) -> Vec<u64> {
    let mut c = Vec::new();
    let mut p = 1u64;
    while p <= k_max {
        c.push(p);
        if 2 * p <= k_max {
            c.push(2 * p);
        }
        match p.checked_mul(10) {
            Some(x) => p = x,
            None => break,
        }
    }
    c.push(k_max);
    c.sort_unstable();
    c.dedup();
    c
}

fn k_terms<F>(k_max: u64, f: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(u64) -> Result<(f64, f64)> + Sync + Send,
{
    (1..=k_max).into_par_iter().map(f).collect()
}

/// Partial sums of `Σ_{n≠0} ‖nβ‖²‖nγ‖² / (n²‖nα‖²)` over `0 < |n| <= N`.
pub fn criterion_series(handle: &AlphaHandle, beta: &CirclePoint, gamma: &CirclePoint, n_max: u64) -> Result<SeriesReport> {
    criterion_series_with(handle, beta, gamma, n_max, &standard_cutoffs(n_max))
}

pub fn criterion_series_with(handle: &AlphaHandle, beta: &CirclePoint, gamma: &CirclePoint, n_max: u64, cutoffs: &[u64]) -> Result<SeriesReport> {
    let oracle = NormOracle::new(handle)?;
    let (bf, gf) = (beta.fixed(handle)?, gamma.fixed(handle)?);
    let terms = k_terms(n_max, |k| {
        let (b_lo, b_hi) = point_norm(bf, k as i128);
        let (g_lo, g_hi) = point_norm(gf, k as i128);
        let (a_lo, a_hi) = oracle.alpha(k as i128)?;
        let kk = (k as f64) * (k as f64);
        Ok((
            down(2.0 * (b_lo * g_lo).powi(2) / (kk * a_hi * a_hi)),
            up(2.0 * (b_hi * g_hi).powi(2) / (kk * a_lo * a_lo)),
        ))
    })?;
    Ok(SeriesReport::from_terms("criterion", &terms, cutoffs))
}

/// Partial sums of `Σ_{n≠0} ‖nβ‖⁴ / (n²‖nα‖²)` over `0 < |n| <= N`.
pub fn h4_series(handle: &AlphaHandle, beta: &CirclePoint, n_max: u64) -> Result<SeriesReport> {
    h4_series_with(handle, beta, n_max, &standard_cutoffs(n_max))
}

pub fn h4_series_with(handle: &AlphaHandle, beta: &CirclePoint, n_max: u64, cutoffs: &[u64]) -> Result<SeriesReport> {
    let oracle = NormOracle::new(handle)?;
    let bf = beta.fixed(handle)?;
    let terms = k_terms(n_max, |k| {
        let (b_lo, b_hi) = point_norm(bf, k as i128);
        let (a_lo, a_hi) = oracle.alpha(k as i128)?;
        let kk = (k as f64) * (k as f64);
        Ok((down(2.0 * b_lo.powi(4) / (kk * a_hi * a_hi)), up(2.0 * b_hi.powi(4) / (kk * a_lo * a_lo))))
    })?;
    Ok(SeriesReport::from_terms("h4", &terms, cutoffs))
}

/// Membership of `k` in `J = {s q_n : 1 <= s <= a_{n+1}, n >= 1}` and in
/// `J' = ⋃_{n>=1} [q_n, q_{n+1}) ∩ {‖kα‖ < 1/(4 q_n)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KClass {
    pub k: u64,
    /// The `n` with `q_n <= k < q_{n+1}`.
    pub block: usize,
    pub in_j: bool,
    pub in_j_prime: bool,
}

/// Convergent denominators up to the block containing `k_max`.
struct Blocks {
    q: Vec<BigInt>,
}

impl Blocks {
    fn new(handle: &AlphaHandle, k_max: u64) -> Result<Self> {
        let mut q = vec![handle.q(0)?];
        let km = BigInt::from(k_max);
        while q.last().unwrap() <= &km {
            q.push(handle.q(q.len())?);
        }
        Ok(Blocks { q })
    }

    /// Largest `n` with `q_n <= k`.
    fn block_of(&self, k: u64) -> usize {
        let kb = BigInt::from(k);
        self.q.partition_point(|x| x <= &kb) - 1
    }

    fn q_u64(&self, n: usize) -> u64 {
        self.q[n].to_u64().unwrap_or(u64::MAX)
    }
}

fn j_prime_threshold(q: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(q) * 4)
}

/// Decides `‖kα‖ < c` from float bounds when possible, exactly otherwise.
fn norm_below(handle: &AlphaHandle, k: u64, bounds: (f64, f64), c: &BigRational) -> Result<bool> {
    let cf = c.to_f64().unwrap_or(0.0);
    if bounds.1 < down(cf) {
        return Ok(true);
    }
    if bounds.0 > up(cf) {
        return Ok(false);
    }
    norm_alpha_less_than(handle, &BigInt::from(k), c)
}

fn classify_with(handle: &AlphaHandle, blocks: &Blocks, k: u64, bounds: (f64, f64)) -> Result<KClass> {
    let n = blocks.block_of(k);
    if n == 0 {
        return Ok(KClass { k, block: 0, in_j: false, in_j_prime: false });
    }
    let qn = blocks.q_u64(n);
    let s = k / qn;
    let a = handle.partial_quotient(n + 1)?;
    let in_j = k % qn == 0 && BigInt::from(s) <= BigInt::from(a);
    let in_j_prime = norm_below(handle, k, bounds, &j_prime_threshold(qn))?;
    Ok(KClass { k, block: n, in_j, in_j_prime })
}

/// Classifies `k >= 1` into `J` and `J'`.
pub fn classify(handle: &AlphaHandle, k: u64) -> Result<KClass> {
    if k == 0 {
        return Err(Error::InvalidArgument("classification needs k >= 1".into()));
    }
    let blocks = Blocks::new(handle, k)?;
    let oracle = NormOracle::new(handle)?;
    classify_with(handle, &blocks, k, oracle.alpha(k as i128)?)
}

/// `ℓ(n)` and `m(n)` for one block.
#[derive(Debug, Clone, Serialize)]
pub struct BlockInfo {
    pub n: usize,
    #[serde(serialize_with = "crate::serde_util::bigint_str")]
    pub q_n: BigInt,
    /// Greatest `i <= n − 1` with `b_i != 0`.
    pub ell: Option<usize>,
    /// Smallest `i >= n` with `b_i != 0`; `None` past the digit support.
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ClassCounts {
    pub j_only: u64,
    pub j_prime_only: u64,
    pub both: u64,
    pub neither: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AppendixReport {
    pub k_max: u64,
    pub blocks: Vec<BlockInfo>,
    pub counts: ClassCounts,
    /// Series `A` through `H`, in order.
    pub series: Vec<SeriesReport>,
}

impl AppendixReport {
    pub fn get(&self, id: &str) -> Option<&SeriesReport> {
        self.series.iter().find(|s| s.series_id == id)
    }
}

/// `x / y` as a float, robust to operands beyond the float range.
fn ratio(x: &BigInt, y: &BigInt) -> f64 {
    BigRational::new(x.clone(), y.clone()).to_f64().unwrap_or(0.0)
}

fn to_f(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// `Σ_{s=1}^{a} 1/s²` enclosed.
fn inverse_square_sum(a: &BigInt) -> (f64, f64) {
    const DIRECT: u64 = 1 << 20;
    let direct = a.to_u64().map(|x| x.min(DIRECT)).unwrap_or(DIRECT);
    let head: f64 = (1..=direct).rev().map(|s| 1.0 / (s as f64 * s as f64)).sum();
    if BigInt::from(direct) == *a {
        return (down(head), up(head));
    }
    // Σ_{s=M+1}^{a} 1/s² lies in [1/(M+1) − 1/(a+1), 1/M − 1/a].
    let m = direct as f64;
    let af = to_f(a);
    (down(head + 1.0 / (m + 1.0) - 1.0 / (af + 1.0)), up(head + 1.0 / m - 1.0 / af))
}

/// Per-block data shared by the terms of one block.
struct BlockTerms {
    ell: Option<(f64, u64, BigInt)>,
    ell_next: Option<(f64, BigInt)>,
    m_next: Option<(f64, BigInt)>,
    m: Option<(f64, BigInt)>,
}

/// Partial sums of the majorant series `(A)`–`(H)` for `β` with digits `b`, with each
/// `k <= K` classified into `J` and `J'`.
///
/// `A`–`F` are indexed by `k`; `G` and `H` are sums over blocks `n` and enter the
/// partial sums at `k = q_n`. Digits past the support count as zero, so an undefined
/// `m(n)` contributes nothing.
pub fn appendix_series(handle: &AlphaHandle, digits: &OstrowskiDigits, beta: &CirclePoint, k_max: u64) -> Result<AppendixReport> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
    }
    let blocks = Blocks::new(handle, k_max)?;
    let oracle = NormOracle::new(handle)?;
    let bf = beta.fixed(handle)?;
    let b_of = |i: usize| to_f(&digits.get(i));
    let nb = blocks.q.len() - 1;
    let mut infos = Vec::with_capacity(nb);
    let mut per_block = Vec::with_capacity(nb);
    for n in 0..nb {
        let ell = digits.ell(n);
        let m = digits.next_support(n);
        infos.push(BlockInfo { n, q_n: blocks.q[n].clone(), ell, m });
        per_block.push(BlockTerms {
            ell: match ell {
                Some(i) => Some((b_of(i), handle.q(i)?.to_u64().unwrap_or(u64::MAX), handle.q(i)?)),
                None => None,
            },
            ell_next: match digits.ell(n + 1) {
                Some(i) => Some((b_of(i), handle.q(i)?)),
                None => None,
            },
            m: match m {
                Some(i) => Some((b_of(i), handle.q(i + 1)?)),
                None => None,
            },
            m_next: match digits.next_support(n + 1) {
                Some(i) => Some((b_of(i), handle.q(i + 1)?)),
                None => None,
            },
        });
    }

    let rows: Vec<(KClass, [(f64, f64); 6])> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let a = oracle.alpha(k as i128)?;
            let cls = classify_with(handle, &blocks, k, a)?;
            let bt = &per_block[cls.block];
            let kk = (k as f64) * (k as f64);
            let z = (0.0, 0.0);
            let mut t = [z; 6];
            let inv_a2 = (1.0 / (a.1 * a.1), 1.0 / (a.0 * a.0));
            // A and B split on ‖kα‖ against 1/q_{ℓ(n)}
            let far = match &bt.ell {
                Some((_, ql, _)) => !norm_below(handle, k, a, &BigRational::new(BigInt::one(), BigInt::from(*ql)))?,
                None => true,
            };
            if far {
                t[0] = (inv_a2.0 / kk, inv_a2.1 / kk);
            } else if let Some((b, _, ql)) = &bt.ell {
                let v = (b * to_f(ql)).powi(2) / kk;
                t[1] = (v, v);
            }
            if !cls.in_j && !cls.in_j_prime {
                if let Some((b, qm1)) = &bt.m {
                    let c = (b / to_f(qm1)).powi(2);
                    t[2] = (c * inv_a2.0, c * inv_a2.1);
                }
            }
            if !cls.in_j && cls.in_j_prime {
                let (b_lo, b_hi) = point_norm(bf, k as i128);
                t[3] = (b_lo * b_lo * inv_a2.0 / kk, b_hi * b_hi * inv_a2.1 / kk);
                if let Some((b, ql)) = &bt.ell_next {
                    let v = (b * to_f(ql)).powi(2) / kk;
                    t[4] = (v, v);
                }
                if let Some((b, qm1)) = &bt.m_next {
                    let c = (b / to_f(qm1)).powi(2);
                    t[5] = (c * inv_a2.0, c * inv_a2.1);
                }
            }
            for x in t.iter_mut() {
                *x = (down(x.0), up(x.1));
            }
            Ok((cls, t))
        })
        .collect::<Result<_>>()?;

    let mut counts = ClassCounts::default();
    for (c, _) in &rows {
        match (c.in_j, c.in_j_prime) {
            (true, true) => counts.both += 1,
            (true, false) => counts.j_only += 1,
            (false, true) => counts.j_prime_only += 1,
            (false, false) => counts.neither += 1,
        }
    }

    // G and H live on blocks and are placed at k = q_n.
    let mut g_terms = vec![(0.0, 0.0); k_max as usize];
    let mut h_terms = vec![(0.0, 0.0); k_max as usize];
    for n in 0..nb {
        let qn = &blocks.q[n];
        let idx = blocks.q_u64(n) as usize - 1;
        let a_next = BigInt::from(handle.partial_quotient(n + 1)?);
        if let Some(&(b, _, ref ql)) = per_block[n].ell.as_ref() {
            let (s_lo, s_hi) = inverse_square_sum(&a_next);
            let r = (b * ratio(ql, qn)).powi(2);
            g_terms[idx].0 += down(r * s_lo);
            g_terms[idx].1 += up(r * s_hi);
        }
        if let Some((b, qm1)) = &per_block[n].m {
            let qn1 = handle.q(n + 1)?;
            let v = b.powi(4) * to_f(&a_next) * (ratio(qn, qm1) * ratio(&qn1, qm1)).powi(2);
            h_terms[idx].0 += down(v);
            h_terms[idx].1 += up(v);
        }
    }

    let cutoffs = standard_cutoffs(k_max);
    let mut series = Vec::with_capacity(8);
    for (i, id) in ["A", "B", "C", "D", "E", "F"].iter().enumerate() {
        let terms: Vec<(f64, f64)> = rows.iter().map(|r| r.1[i]).collect();
        series.push(SeriesReport::from_terms(id, &terms, &cutoffs));
    }
    series.push(SeriesReport::from_terms("G", &g_terms, &cutoffs));
    series.push(SeriesReport::from_terms("H", &h_terms, &cutoffs));
    Ok(AppendixReport { k_max, blocks: infos, counts, series })
}
