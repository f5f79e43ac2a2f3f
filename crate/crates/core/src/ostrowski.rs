//! Ostrowski expansions `β = Σ b_j q_j α mod 1`, the `H_r(α)` partial sums, the
//! special-β plan with sparse digits, and the arithmetic conditions for the
//! multiplicative equation `e^{2πisφ} = e^{2πit} f∘T/f`.
//!
//! Digits are indexed from `j = 0` (`q_0 = 1`). The greedy expansion works with the
//! signed distances `θ_k = q_k α − p_k` (so `θ_{-1} = -1`) and keeps the remainder
//! inside the hull of what the remaining digits can still reach:
//!
//! ```text
//! k even: [-|θ_k|, |θ_{k-1}|]      k odd: [-|θ_{k-1}|, |θ_k|]
//! ```
//!
//! This yields digits `0 <= b_k <= a_{k+1}`; among admissible digits the one with the
//! smaller remainder wins (ties go to the smaller digit).

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::circle::{CirclePoint, LatticePoint, LatticeReal};
use crate::contfrac::{AlphaHandle, AlphaSpec, Expr};
use crate::error::{Error, Result};
use crate::serde_util;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OstrowskiDigits {
    /// Nonzero digits `b_j`; indices beyond `horizon` are zero by convention.
    pub digits: BTreeMap<usize, BigInt>,
    pub horizon: usize,
    /// Upper bound on `|β − Σ_{j<=J} b_j θ_j|`.
    pub tail_bound: BigRational,
}

impl OstrowskiDigits {
    pub fn empty() -> Self {
        OstrowskiDigits { digits: BTreeMap::new(), horizon: 0, tail_bound: BigRational::zero() }
    }

    /// Exact finite expansion (tail 0) from `(index, digit)` pairs.
    pub fn from_pairs(pairs: &[(usize, i64)]) -> Self {
        let digits: BTreeMap<usize, BigInt> =
            pairs.iter().filter(|(_, b)| *b != 0).map(|&(j, b)| (j, BigInt::from(b))).collect();
        let horizon = digits.keys().last().copied().unwrap_or(0);
        OstrowskiDigits { digits, horizon, tail_bound: BigRational::zero() }
    }

    pub fn get(&self, j: usize) -> BigInt {
        self.digits.get(&j).cloned().unwrap_or_default()
    }

    /// `Σ b_j q_j`, the multiple of α the digits add up to.
    pub fn weight(&self, handle: &AlphaHandle) -> Result<BigInt> {
        let mut m = BigInt::zero();
        for (&j, b) in &self.digits {
            m += b * handle.q(j)?;
        }
        Ok(m)
    }

    /// Greatest `i <= n - 1` with `b_i != 0`.
    pub fn ell(&self, n: usize) -> Option<usize> {
        if n == 0 {
            return None;
        }
        self.digits.range(..n).next_back().map(|(&i, _)| i)
    }

    /// Smallest `i >= n` with `b_i != 0`.
    pub fn next_support(&self, n: usize) -> Option<usize> {
        self.digits.range(n..).next().map(|(&i, _)| i)
    }
}

impl Serialize for OstrowskiDigits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let digits: BTreeMap<String, String> = self.digits.iter().map(|(j, b)| (j.to_string(), b.to_string())).collect();
        let mut st = s.serialize_struct("OstrowskiDigits", 4)?;
        st.serialize_field("start", &0)?;
        st.serialize_field("digits", &digits)?;
        st.serialize_field("horizon", &self.horizon)?;
        st.serialize_field("tail_bound", &self.tail_bound.to_string())?;
        st.end()
    }
}

fn abs_theta(handle: &AlphaHandle, k: isize) -> Result<LatticeReal> {
    let t = LatticeReal::theta(handle, k)?;
    Ok(if k.rem_euclid(2) == 0 { t } else { t.neg() })
}

/// Hull of the values `Σ_{i>=k} c_i θ_i` reachable by admissible digits.
fn hull(handle: &AlphaHandle, k: isize) -> Result<(LatticeReal, LatticeReal)> {
    let cur = abs_theta(handle, k)?;
    let prev = abs_theta(handle, k - 1)?;
    Ok(if k.rem_euclid(2) == 0 { (cur.neg(), prev) } else { (prev.neg(), cur) })
}

fn within(handle: &AlphaHandle, x: &LatticeReal, lo: &LatticeReal, hi: &LatticeReal) -> Result<bool> {
    Ok(x.cmp_with(lo, handle)? != Ordering::Less && x.cmp_with(hi, handle)? != Ordering::Greater)
}

/// One greedy step: the admissible digit at index `k` and the new remainder.
fn greedy_digit(handle: &AlphaHandle, x: &LatticeReal, k: usize) -> Result<(BigInt, LatticeReal)> {
    let ki = k as isize;
    let theta = LatticeReal::theta(handle, ki)?;
    let a = BigInt::from(handle.partial_quotient(k + 1)?);
    let (lo, hi) = hull(handle, ki + 1)?;

    // Estimate x/θ_k from convergent approximations accurate well below |θ_k|.
    let q_next = handle.q(k + 2)?;
    let scale = (x.m.abs() + BigInt::one()) * q_next * BigInt::from(1u32 << 20);
    let d = handle.depth_for_product(&scale, &format!("Ostrowski digit b_{k}"))?.max(k + 2);
    let (p, q) = handle.convergent(d as isize)?;
    let approx = |v: &LatticeReal| &v.r + BigRational::new(&v.m * &p, q.clone());
    let est = (approx(x) / approx(&theta)).floor().to_integer();

    let mut best: Option<(BigInt, LatticeReal, LatticeReal)> = None;
    let mut c: BigInt = &est - 2;
    let last: BigInt = &est + 2;
    while c <= last {
        if !c.is_negative() && c <= a {
            let rem = x.sub(&theta.scale(&c));
            if within(handle, &rem, &lo, &hi)? {
                let mag = rem.abs(handle)?;
                let better = match &best {
                    None => true,
                    Some((_, _, m)) => mag.cmp_with(m, handle)? == Ordering::Less,
                };
                if better {
                    best = Some((c.clone(), rem, mag));
                }
            }
        }
        c += 1;
    }
    best.map(|(c, rem, _)| (c, rem))
        .ok_or_else(|| Error::precision(format!("no admissible Ostrowski digit at index {k}")))
}

fn tail_upper_bound(handle: &AlphaHandle, rem: &LatticeReal, k: usize) -> Result<BigRational> {
    if rem.is_zero() {
        return Ok(BigRational::zero());
    }
    let w = BigRational::new(BigInt::one(), handle.q(k + 1)? << 32u32);
    let e = rem.enclose(handle, &w)?;
    Ok(e.lo().abs().max(e.hi().abs()))
}

fn expand_real(handle: &AlphaHandle, x: &LatticeReal, horizon: usize) -> Result<(OstrowskiDigits, LatticeReal)> {
    let mut digits = BTreeMap::new();
    let mut rem = x.clone();
    for k in 0..=horizon {
        if rem.is_zero() {
            break;
        }
        let (c, next) = greedy_digit(handle, &rem, k)?;
        if !c.is_zero() {
            digits.insert(k, c);
        }
        rem = next;
    }
    let tail_bound = tail_upper_bound(handle, &rem, horizon)?;
    Ok((OstrowskiDigits { digits, horizon, tail_bound }, rem))
}

/// Greedy Ostrowski digits of `beta` for indices `0..=horizon`.
pub fn expand(handle: &AlphaHandle, beta: &CirclePoint, horizon: usize) -> Result<OstrowskiDigits> {
    match beta {
        CirclePoint::Lattice(p) => Ok(expand_real(handle, &p.value(), horizon)?.0),
        CirclePoint::Decimal(d) => {
            let lo = &d.center - &d.radius;
            let hi = &d.center + &d.radius;
            if lo.is_negative() || hi >= BigRational::one() {
                return Err(Error::precision("Ostrowski digit b_0 (decimal straddles 0 mod 1)"));
            }
            let (dl, rl) = expand_real(handle, &LatticeReal::rational(lo), horizon)?;
            let (dh, rh) = expand_real(handle, &LatticeReal::rational(hi), horizon)?;
            if dl.digits != dh.digits {
                let k = (0..=horizon).find(|&k| dl.get(k) != dh.get(k)).unwrap_or(horizon);
                return Err(Error::precision(format!("Ostrowski digit b_{k} of decimal beta")));
            }
            // Same digits at both ends: the true remainder lies between the two.
            let tb = tail_upper_bound(handle, &rl, horizon)?.max(tail_upper_bound(handle, &rh, horizon)?);
            Ok(OstrowskiDigits { digits: dl.digits, horizon, tail_bound: tb })
        }
    }
}

/// Exact lattice point `Σ b_j q_j α mod 1`.
pub fn synthesize(handle: &AlphaHandle, digits: &OstrowskiDigits) -> Result<CirclePoint> {
    let mut r = BigInt::zero();
    let mut m = BigInt::zero();
    for (&j, b) in &digits.digits {
        let (p, q) = handle.convergent(j as isize)?;
        r -= b * p;
        m += b * q;
    }
    CirclePoint::lattice(handle, BigRational::from_integer(r), m)
}

#[derive(Debug, Clone, Serialize)]
pub struct HrDiagnostic {
    pub r: u32,
    pub horizon: usize,
    /// `S_J = Σ_{j<=J} |b_j|^r / a_{j+1}` for `J = 0..=horizon`.
    #[serde(serialize_with = "serde_util::rational_vec")]
    pub partial_sums: Vec<BigRational>,
}

pub fn hr_partial_sums(digits: &OstrowskiDigits, handle: &AlphaHandle, r: u32) -> Result<HrDiagnostic> {
    if r == 0 {
        return Err(Error::InvalidArgument("H_r exponent must be positive".into()));
    }
    let mut acc = BigRational::zero();
    let mut partial_sums = Vec::with_capacity(digits.horizon + 1);
    for j in 0..=digits.horizon {
        let b = digits.get(j);
        if !b.is_zero() {
            let a = BigInt::from(handle.partial_quotient(j + 1)?);
            acc += BigRational::new(num_traits::pow(b.abs(), r as usize), a);
        }
        partial_sums.push(acc.clone());
    }
    Ok(HrDiagnostic { r, horizon: digits.horizon, partial_sums })
}

/// Sparse-digit β built from a sparse α: digit `b_n` sits at index `j_n = J(n) − 1`,
/// where `J(n)` is the sparse index of α, so that `a_{j_n+1}` is the prescribed large
/// quotient.
#[derive(Debug, Clone, Serialize)]
pub struct SpecialBetaPlan {
    pub alpha: String,
    pub d_rule: String,
    pub n_max: usize,
    /// Digit positions `j_n`.
    pub digit_index: Vec<usize>,
    /// `d_n` for `n = 1..n_max-1` (entry `n - 1`).
    #[serde(serialize_with = "serde_util::bigint_vec")]
    pub multipliers: Vec<BigInt>,
    /// `b_{j_n}` for `n = 0..=n_max`.
    #[serde(serialize_with = "serde_util::bigint_vec")]
    pub values: Vec<BigInt>,
    /// Partial sums of `Σ b_{j_n} / a_{j_n+1}`.
    #[serde(serialize_with = "serde_util::rational_vec")]
    pub h1_partial_sums: Vec<BigRational>,
    /// Partial sums of `Σ (b_{j_n} / b_{j_{n+1}})^2`.
    #[serde(serialize_with = "serde_util::rational_vec")]
    pub ratio_partial_sums: Vec<BigRational>,
}

pub fn construct_special_beta(handle: &AlphaHandle, d_rule: &Expr, n_max: usize) -> Result<SpecialBetaPlan> {
    if !matches!(handle.spec(), AlphaSpec::Sparse(_)) {
        return Err(Error::InvalidPlan(format!("special-beta plans need a sparse alpha spec, got {}", handle.spec())));
    }
    let as_plan = |e: Error| match e {
        Error::InvalidSpec(m) => Error::InvalidPlan(m),
        other => other,
    };
    let mut digit_index = Vec::with_capacity(n_max + 2);
    for n in 0..=n_max + 1 {
        let j = handle.sparse_index(n).map_err(as_plan)?;
        if let Some(&prev) = digit_index.last() {
            if j - 1 <= prev {
                return Err(Error::InvalidPlan(format!("sparse indices not strictly increasing at n = {n}")));
            }
        }
        digit_index.push(j - 1);
    }
    let mut multipliers = Vec::new();
    let mut values = vec![BigInt::one(), BigInt::one()];
    for n in 1..=n_max {
        let d = d_rule.eval(n as u64)?;
        if d < BigInt::one() {
            return Err(Error::InvalidPlan(format!("multiplier d_{n} = {d} must be >= 1")));
        }
        let next = &d * &values[n] + &values[n - 1];
        multipliers.push(d);
        values.push(next);
    }
    values.truncate(n_max + 2);
    let mut h1 = Vec::new();
    let mut ratios = Vec::new();
    let (mut s1, mut s2) = (BigRational::zero(), BigRational::zero());
    for n in 0..=n_max {
        let a = BigInt::from(handle.partial_quotient(digit_index[n] + 1)?);
        s1 += BigRational::new(values[n].clone(), a);
        let ratio = BigRational::new(values[n].clone(), values[n + 1].clone());
        s2 += &ratio * &ratio;
        h1.push(s1.clone());
        ratios.push(s2.clone());
    }
    digit_index.truncate(n_max + 2);
    Ok(SpecialBetaPlan {
        alpha: handle.spec().to_string(),
        d_rule: d_rule.to_string(),
        n_max,
        digit_index,
        multipliers,
        values,
        h1_partial_sums: h1,
        ratio_partial_sums: ratios,
    })
}

impl SpecialBetaPlan {
    /// Whether consecutive values are coprime for `n <= n_max`.
    pub fn coprime_violations(&self) -> Vec<usize> {
        (0..=self.n_max).filter(|&n| !self.values[n].gcd(&self.values[n + 1]).is_one()).collect()
    }

    /// Whether `b_{n+1} = d_n b_n + b_{n-1}` holds for every stored `n >= 1`.
    pub fn recurrence_holds(&self) -> bool {
        (1..=self.n_max)
            .filter(|&n| n + 1 < self.values.len())
            .all(|n| self.values[n + 1] == &self.multipliers[n - 1] * &self.values[n] + &self.values[n - 1])
    }

    /// Digits `{j_n: b_{j_n}}` for `n <= terms`, with the tail bound from the next
    /// digits. The tail `Σ_{n>terms} b_{j_n} θ_{j_n}` is bounded by its known terms
    /// plus a geometric remainder; each known ratio must be at most 1/2.
    pub fn truncated_digits(&self, handle: &AlphaHandle, terms: usize) -> Result<OstrowskiDigits> {
        if terms >= self.n_max {
            return Err(Error::InvalidPlan(format!("truncation {terms} needs n_max > {terms} (have {})", self.n_max)));
        }
        let digits: BTreeMap<usize, BigInt> =
            (0..=terms).map(|n| (self.digit_index[n], self.values[n].clone())).collect();
        let term = |n: usize| -> Result<BigRational> {
            Ok(BigRational::new(self.values[n].clone(), handle.q(self.digit_index[n] + 1)?))
        };
        let mut tail = BigRational::zero();
        let mut last = term(terms + 1)?;
        tail += &last;
        for n in terms + 2..=self.n_max {
            let t = term(n)?;
            if &t * BigInt::from(2) > last {
                return Err(Error::InvalidPlan(format!("plan tail does not decay geometrically at n = {n}")));
            }
            tail += &t;
            last = t;
        }
        tail += last;
        Ok(OstrowskiDigits { digits, horizon: self.digit_index[terms], tail_bound: tail })
    }

    /// Truncated β as an exact lattice point.
    pub fn beta(&self, handle: &AlphaHandle, terms: usize) -> Result<(CirclePoint, OstrowskiDigits)> {
        let d = self.truncated_digits(handle, terms)?;
        Ok((synthesize(handle, &d)?, d))
    }
}

/// A real parameter known to lie in `[center − radius, center + radius]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealParam {
    pub center: BigRational,
    pub radius: BigRational,
}

impl RealParam {
    pub fn exact(v: BigRational) -> Self {
        RealParam { center: v, radius: BigRational::zero() }
    }

    /// `p/q`, an integer, or a decimal literal (radius half a unit in the last digit).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('.') {
            let (int, frac) = s.split_once('.').unwrap();
            let neg = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
            let mut num: BigInt = digits.parse().map_err(|_| Error::parse(s, "expected a decimal number"))?;
            if neg {
                num = -num;
            }
            let den = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(RealParam {
                center: BigRational::new(num, den.clone()),
                radius: BigRational::new(BigInt::one(), den * 2),
            });
        }
        Ok(Self::exact(crate::circle::parse_rational(s)?))
    }

    fn scaled(&self, b: &BigInt) -> (BigRational, BigRational) {
        let b = BigRational::from_integer(b.clone());
        let c = &self.center * &b;
        let r = &self.radius * b.abs();
        (&c - &r, &c + &r)
    }
}

fn nearest_integer(u: &BigRational) -> BigInt {
    (u + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

fn dist_sq(u: &BigRational) -> BigRational {
    let d = u - BigRational::from_integer(nearest_integer(u));
    &d * &d
}

#[derive(Debug, Clone, Serialize)]
pub struct GPConditionReport {
    pub s: String,
    pub horizon: usize,
    /// Lower/upper partial sums of `Σ_{n<=J} ‖b_n s‖²`.
    #[serde(serialize_with = "serde_util::rational_vec")]
    pub square_sums_lo: Vec<BigRational>,
    #[serde(serialize_with = "serde_util::rational_vec")]
    pub square_sums_hi: Vec<BigRational>,
    /// Nearest integers `[b_n s]`.
    #[serde(serialize_with = "serde_util::bigint_vec")]
    pub roundings: Vec<BigInt>,
    /// `t_J = −Σ_{n<=J} [b_n s] q_n α mod 1` (with `k = 0`).
    pub t_partial: Vec<CirclePoint>,
}

/// Evaluates `‖b_n s‖` and `[b_n s]` over the digits, for `n <= horizon`.
pub fn gp_condition_check(
    digits: &OstrowskiDigits,
    handle: &AlphaHandle,
    s: &RealParam,
    horizon: usize,
) -> Result<GPConditionReport> {
    let mut lo_sum = BigRational::zero();
    let mut hi_sum = BigRational::zero();
    let (mut r, mut m) = (BigInt::zero(), BigInt::zero());
    let mut report = GPConditionReport {
        s: format!("{} +/- {}", s.center, s.radius),
        horizon,
        square_sums_lo: vec![],
        square_sums_hi: vec![],
        roundings: vec![],
        t_partial: vec![],
    };
    for n in 0..=horizon {
        let b = digits.get(n);
        let (lo, hi) = s.scaled(&b);
        let k = nearest_integer(&lo);
        if nearest_integer(&hi) != k {
            return Err(Error::precision(format!("rounding [b_{n} s] (b_{n} s too close to a half-integer)")));
        }
        let (dl, dh) = (dist_sq(&lo), dist_sq(&hi));
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let kq = BigRational::from_integer(k.clone());
        // ‖·‖² over an interval free of half-integers: the minimum is 0 if it holds k.
        let min = if lo <= kq && kq <= hi { BigRational::zero() } else { dl.clone().min(dh.clone()) };
        let max = dl.max(dh).min(&half * &half);
        lo_sum += min;
        hi_sum += max;
        if !k.is_zero() {
            let (p, q) = handle.convergent(n as isize)?;
            r += &k * p;
            m -= &k * q;
        }
        report.square_sums_lo.push(lo_sum.clone());
        report.square_sums_hi.push(hi_sum.clone());
        report.roundings.push(k);
        report.t_partial.push(CirclePoint::lattice(handle, BigRational::from_integer(r.clone()), m.clone())?);
    }
    Ok(report)
}

/// The two partitions evaluated: `φ_{β,γ}` with atoms `{0, β}`, `{−γ, β−γ}`, and the
/// single atom `{0, β, aβ}` of `a·1_{[0,β)} − 1_{[0,aβ)}`.
#[derive(Debug, Clone)]
pub enum PartitionCase {
    PhiBetaGamma,
    Prop32 { a: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct AtomReport {
    pub points: Vec<String>,
    /// `Σ_{j∈J} s_j` for the scaled cocycle `s·φ`.
    #[serde(serialize_with = "serde_util::rational_str")]
    pub jump_sum: BigRational,
    pub jump_sum_integer: bool,
    /// Upper partial sums of `Σ_n ‖Σ_{j∈J} b_n^j s_j‖²`.
    #[serde(serialize_with = "serde_util::rational_vec")]
    pub square_sums_hi: Vec<BigRational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub case: String,
    pub atoms: Vec<AtomReport>,
}

/// Evaluates conditions (i) and (ii) of the partition criterion on the concrete
/// partitions above, with `β` given by `digits` and the cocycle scaled by `s`.
pub fn partition_condition_check(
    case: &PartitionCase,
    digits: &OstrowskiDigits,
    s: &RealParam,
    horizon: usize,
) -> Result<PartitionReport> {
    // Per atom: points with their (jump, digit multiplier relative to β_J).
    let atoms: Vec<(Vec<&str>, Vec<(i64, i64)>)> = match case {
        // jumps of φ_{β,γ}: +1 at 0, −1 at β, −1 at −γ, +1 at β−γ; s_j = −jump
        PartitionCase::PhiBetaGamma => vec![
            (vec!["0", "beta"], vec![(-1, 0), (1, 1)]),
            (vec!["-gamma", "beta-gamma"], vec![(1, 0), (-1, 1)]),
        ],
        PartitionCase::Prop32 { a } => {
            let a = *a as i64;
            vec![(vec!["0", "beta", "a*beta"], vec![(-(a - 1), 0), (a, 1), (-1, a)])]
        }
    };
    let mut out = Vec::new();
    for (points, members) in atoms {
        let jump_sum: BigRational = members
            .iter()
            .map(|&(sj, _)| &s.center * BigRational::from_integer(sj.into()))
            .fold(BigRational::zero(), |acc, v| acc + v);
        let jump_sum_integer = s.radius.is_zero() && jump_sum.is_integer();
        let mut acc = BigRational::zero();
        let mut sums = Vec::new();
        for n in 0..=horizon {
            let b = digits.get(n);
            // Σ_j b_n^j s_j with b_n^j = mult_j · b_n
            let coef: i64 = members.iter().map(|&(sj, mult)| sj * mult).sum();
            let combined = RealParam { center: &s.center * BigRational::from_integer(coef.into()), radius: &s.radius * BigRational::from_integer(coef.abs().into()) };
            let (lo, hi) = combined.scaled(&b);
            let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
            let bound = if nearest_integer(&lo) == nearest_integer(&hi) { dist_sq(&lo).max(dist_sq(&hi)) } else { quarter };
            acc += bound;
            sums.push(acc.clone());
        }
        out.push(AtomReport {
            points: points.into_iter().map(str::to_owned).collect(),
            jump_sum,
            jump_sum_integer,
            square_sums_hi: sums,
        });
    }
    Ok(PartitionReport { case: format!("{case:?}"), atoms: out })
}

/// Sanity hook used by callers that need the lattice form of a synthesized point.
pub fn synthesize_lattice(handle: &AlphaHandle, digits: &OstrowskiDigits) -> Result<LatticePoint> {
    Ok(synthesize(handle, digits)?.require_lattice("synthesized point")?.clone())
}

/// `q_{j}` as an `f64` (saturating), for reporting.
pub fn q_f64(handle: &AlphaHandle, j: usize) -> Result<f64> {
    Ok(handle.q(j)?.to_f64().unwrap_or(f64::INFINITY))
}
