//! Step functions on the circle built from weighted half-open arcs, with exact
//! evaluation and Birkhoff sums.
//!
//! A cocycle is `Σ_i w_i 1_{[s_i, e_i)} + c`, with integer weights and a constant
//! `c = u + vβ`. Every value is therefore an exact pair `(u, v)` meaning `u + vβ`,
//! where `β` is the reference parameter of the cocycle. All indicators are
//! half-open, so evaluation is total on lattice points.

mod count;
mod orbit;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::circle::{CirclePoint, LatticeReal};
use crate::contfrac::AlphaHandle;
use crate::error::{Error, Result};

pub use count::{count_in_initial_arc, floor_sum, sum_floor_orbit};
pub use orbit::{birkhoff_naive, ArcTable, OrbitEngine};

/// `u + vβ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Value {
    pub u: BigInt,
    pub v: BigInt,
}

impl Value {
    pub fn int(u: i64) -> Self {
        Value { u: u.into(), v: BigInt::zero() }
    }

    pub fn new(u: i64, v: i64) -> Self {
        Value { u: u.into(), v: v.into() }
    }

    pub fn add(&self, o: &Value) -> Value {
        Value { u: &self.u + &o.u, v: &self.v + &o.v }
    }

    pub fn sub(&self, o: &Value) -> Value {
        Value { u: &self.u - &o.u, v: &self.v - &o.v }
    }

    pub fn scale(&self, k: &BigInt) -> Value {
        Value { u: &self.u * k, v: &self.v * k }
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    /// The real number `u + vβ` for a lattice `β`.
    pub fn to_real(&self, beta: Option<&CirclePoint>) -> Result<LatticeReal> {
        let base = LatticeReal::rational(BigRational::from_integer(self.u.clone()));
        if self.v.is_zero() {
            return Ok(base);
        }
        let beta = beta
            .ok_or_else(|| Error::InvalidArgument("value has a beta component but no beta".into()))?
            .require_lattice("beta")?;
        Ok(base.add(&beta.value().scale(&self.v)))
    }

    pub fn to_f64(&self, handle: &AlphaHandle, beta: Option<&CirclePoint>) -> Result<f64> {
        if self.v.is_zero() {
            return Ok(self.u.to_f64().unwrap_or(f64::NAN));
        }
        let b = beta.ok_or_else(|| Error::InvalidArgument("value has a beta component but no beta".into()))?;
        Ok(self.u.to_f64().unwrap_or(f64::NAN) + self.v.to_f64().unwrap_or(f64::NAN) * b.to_f64(handle)?)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            write!(f, "{}", self.u)
        } else {
            write!(f, "{}{:+}*beta", self.u, self.v)
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Value", 2)?;
        st.serialize_field("u", &self.u.to_string())?;
        st.serialize_field("v", &self.v.to_string())?;
        st.end()
    }
}

/// `weight · 1_{[start, end)}` on the circle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub start: CirclePoint,
    pub end: CirclePoint,
    pub weight: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CocycleKind {
    PhiBeta,
    PhiBetaGamma,
    Indicator,
    Prop32 { a: u64 },
    Zero,
    Custom,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepCocycle {
    pub kind: CocycleKind,
    pub beta: Option<CirclePoint>,
    pub gamma: Option<CirclePoint>,
    pub arcs: Vec<Arc>,
    pub constant: Value,
    /// Points where the value actually jumps, sorted by their `[0, 1)` representative.
    pub breakpoints: Vec<CirclePoint>,
    /// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])` (cyclically).
    pub values: Vec<Value>,
    /// Interval convention, recorded in every serialized cocycle.
    pub convention: &'static str,
}

fn sort_points(handle: &AlphaHandle, pts: &mut Vec<CirclePoint>) -> Result<()> {
    // insertion sort: comparisons are fallible and lists are tiny
    for i in 1..pts.len() {
        let mut j = i;
        while j > 0 && pts[j - 1].cmp_repr(handle, &pts[j])? == Ordering::Greater {
            pts.swap(j - 1, j);
            j -= 1;
        }
    }
    Ok(())
}

fn check_open_unit(handle: &AlphaHandle, p: &CirclePoint, name: &str) -> Result<()> {
    if p.cmp_repr(handle, &CirclePoint::zero())? == Ordering::Equal {
        return Err(Error::DegenerateParameter(format!("{name} must lie in (0,1), got {p}")));
    }
    Ok(())
}

impl StepCocycle {
    /// General constructor; computes the effective breakpoints and piece values.
    pub fn from_arcs(
        handle: &AlphaHandle,
        kind: CocycleKind,
        beta: Option<CirclePoint>,
        gamma: Option<CirclePoint>,
        arcs: Vec<Arc>,
        constant: Value,
    ) -> Result<Self> {
        if arcs.len() > 8 {
            return Err(Error::InvalidArgument("at most 8 arcs per step cocycle".into()));
        }
        let mut cand: Vec<CirclePoint> = Vec::new();
        for a in &arcs {
            for p in [&a.start, &a.end] {
                let mut dup = false;
                for c in &cand {
                    if c.cmp_repr(handle, p)? == Ordering::Equal {
                        dup = true;
                        break;
                    }
                }
                if !dup {
                    cand.push(p.clone());
                }
            }
        }
        sort_points(handle, &mut cand)?;
        let mut f = StepCocycle {
            kind,
            beta,
            gamma,
            arcs,
            constant,
            breakpoints: vec![],
            values: vec![],
            convention: "half-open [a,b)",
        };
        let vals: Vec<Value> = cand.iter().map(|p| f.evaluate(handle, p)).collect::<Result<_>>()?;
        let k = cand.len();
        let mut bps = Vec::new();
        let mut values = Vec::new();
        for i in 0..k {
            if vals[i] != vals[(i + k - 1) % k] {
                bps.push(cand[i].clone());
                values.push(vals[i].clone());
            }
        }
        if bps.is_empty() {
            values.push(f.evaluate(handle, &CirclePoint::zero())?);
        }
        f.breakpoints = bps;
        f.values = values;
        Ok(f)
    }

    /// `φ_β = 1_{[0,β)} − β`.
    pub fn phi_beta(handle: &AlphaHandle, beta: &CirclePoint) -> Result<Self> {
        check_open_unit(handle, beta, "beta")?;
        let arcs = vec![Arc { start: CirclePoint::zero(), end: beta.clone(), weight: 1 }];
        Self::from_arcs(handle, CocycleKind::PhiBeta, Some(beta.clone()), None, arcs, Value::new(0, -1))
    }

    /// `φ_{β,γ}(x) = 1_{[0,β)}(x) − 1_{[0,β)}(x + γ)`.
    pub fn phi_beta_gamma(handle: &AlphaHandle, beta: &CirclePoint, gamma: &CirclePoint) -> Result<Self> {
        check_open_unit(handle, beta, "beta")?;
        check_open_unit(handle, gamma, "gamma")?;
        let ng = gamma.neg(handle)?;
        let arcs = vec![
            Arc { start: CirclePoint::zero(), end: beta.clone(), weight: 1 },
            Arc { start: ng.clone(), end: beta.add(handle, &ng)?, weight: -1 },
        ];
        Self::from_arcs(handle, CocycleKind::PhiBetaGamma, Some(beta.clone()), Some(gamma.clone()), arcs, Value::int(0))
    }

    /// `1_{[0,β)}` (helper mode; integral β, not zero-mean).
    pub fn indicator(handle: &AlphaHandle, beta: &CirclePoint) -> Result<Self> {
        check_open_unit(handle, beta, "beta")?;
        let arcs = vec![Arc { start: CirclePoint::zero(), end: beta.clone(), weight: 1 }];
        Self::from_arcs(handle, CocycleKind::Indicator, Some(beta.clone()), None, arcs, Value::int(0))
    }

    /// `a·1_{[0,β)} − 1_{[0,{aβ})} − ⌊aβ⌋`: the lift of `a·1_{[0,β)} − 1_{[0,aβ)}` with
    /// `aβ` read on the real line, which has integral `aβ − aβ = 0`.
    pub fn prop32(handle: &AlphaHandle, beta: &CirclePoint, a: u64) -> Result<Self> {
        check_open_unit(handle, beta, "beta")?;
        if a == 0 {
            return Err(Error::DegenerateParameter("a must be a positive integer".into()));
        }
        let b = beta.require_lattice("beta")?.value();
        let ab = b.scale(&BigInt::from(a));
        let fl = ab.floor(handle)?;
        let ab_pt = CirclePoint::lattice(handle, ab.r.clone(), ab.m.clone())?;
        let mut arcs = vec![Arc { start: CirclePoint::zero(), end: beta.clone(), weight: a as i64 }];
        if !matches!(ab_pt.cmp_repr(handle, &CirclePoint::zero())?, Ordering::Equal) {
            arcs.push(Arc { start: CirclePoint::zero(), end: ab_pt, weight: -1 });
        }
        let constant = Value { u: -fl, v: BigInt::zero() };
        Self::from_arcs(handle, CocycleKind::Prop32 { a }, Some(beta.clone()), None, arcs, constant)
    }

    pub fn zero() -> Self {
        StepCocycle {
            kind: CocycleKind::Zero,
            beta: None,
            gamma: None,
            arcs: vec![],
            constant: Value::int(0),
            breakpoints: vec![],
            values: vec![Value::int(0)],
            convention: "half-open [a,b)",
        }
    }

    /// Value at `x` (half-open convention).
    pub fn evaluate(&self, handle: &AlphaHandle, x: &CirclePoint) -> Result<Value> {
        let mut u = self.constant.u.clone();
        for a in &self.arcs {
            if x.in_arc(handle, &a.start, &a.end)? {
                u += a.weight;
            }
        }
        Ok(Value { u, v: self.constant.v.clone() })
    }

    /// Total variation: the sum of absolute jumps.
    pub fn variation(&self) -> BigInt {
        let k = self.values.len();
        if k <= 1 {
            return BigInt::zero();
        }
        (0..k).map(|i| (&self.values[i].u - &self.values[(i + k - 1) % k].u).abs()).sum()
    }

    /// Exact integral (needs lattice-form breakpoints).
    pub fn integral(&self, handle: &AlphaHandle) -> Result<LatticeReal> {
        let mut acc = self.constant.to_real(self.beta.as_ref())?;
        for a in &self.arcs {
            let len = a.start.arc_length(handle, &a.end)?;
            acc = acc.add(&len.scale(&BigInt::from(a.weight)));
        }
        Ok(acc)
    }

    /// Exact `∫ f²` for integer-valued cocycles with lattice breakpoints.
    pub fn integral_of_square(&self, handle: &AlphaHandle) -> Result<LatticeReal> {
        if !self.constant.v.is_zero() {
            return Err(Error::InvalidArgument("integral of the square needs an integer-valued cocycle".into()));
        }
        let k = self.breakpoints.len();
        if k == 0 {
            let u = &self.values[0].u;
            return Ok(LatticeReal::rational(BigRational::from_integer(u * u)));
        }
        let mut acc = LatticeReal::zero();
        for i in 0..k {
            let len = self.breakpoints[i].arc_length(handle, &self.breakpoints[(i + 1) % k])?;
            let u = &self.values[i].u;
            acc = acc.add(&len.scale(&(u * u)));
        }
        Ok(acc)
    }

    /// `x ↦ f(x + t)`.
    pub fn translate(&self, handle: &AlphaHandle, t: &CirclePoint) -> Result<StepCocycle> {
        let nt = t.neg(handle)?;
        let arcs = self
            .arcs
            .iter()
            .map(|a| Ok(Arc { start: a.start.add(handle, &nt)?, end: a.end.add(handle, &nt)?, weight: a.weight }))
            .collect::<Result<Vec<_>>>()?;
        Self::from_arcs(handle, CocycleKind::Custom, self.beta.clone(), None, arcs, self.constant.clone())
    }

    /// `self − other`; both must share the reference β.
    pub fn minus(&self, handle: &AlphaHandle, other: &StepCocycle) -> Result<StepCocycle> {
        let mut arcs = self.arcs.clone();
        arcs.extend(other.arcs.iter().map(|a| Arc { weight: -a.weight, ..a.clone() }));
        Self::from_arcs(handle, CocycleKind::Custom, self.beta.clone(), None, arcs, self.constant.sub(&other.constant))
    }

    pub fn scaled(&self, handle: &AlphaHandle, k: i64) -> Result<StepCocycle> {
        let arcs = self.arcs.iter().map(|a| Arc { weight: a.weight * k, ..a.clone() }).collect();
        Self::from_arcs(handle, CocycleKind::Custom, self.beta.clone(), None, arcs, self.constant.scale(&BigInt::from(k)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    Fast,
}

#[derive(Debug, Clone, Serialize)]
pub struct BirkhoffResult {
    pub n: u64,
    pub value: Value,
    pub method: Method,
    pub depth_used: usize,
    /// Orbit indices `j` where `x_j` hit a breakpoint exactly (capped list).
    pub exact_hits: Vec<u64>,
    pub exact_hit_count: u64,
}

/// `Σ_{j<n} 1_{[0,β)}(x + jα)` via floor sums.
pub fn birkhoff_fast_indicator(handle: &AlphaHandle, beta: &CirclePoint, x: &CirclePoint, n: u64) -> Result<BirkhoffResult> {
    let f = StepCocycle::indicator(handle, beta)?;
    birkhoff_fast(handle, &f, x, n)
}

/// Birkhoff sum of any step cocycle via per-arc floor sums.
pub fn birkhoff_fast(handle: &AlphaHandle, f: &StepCocycle, x: &CirclePoint, n: u64) -> Result<BirkhoffResult> {
    let xl = x.require_lattice("x")?;
    let mut u = &f.constant.u * BigInt::from(n);
    let mut depth = 0;
    for a in &f.arcs {
        let start = a.start.require_lattice("arc start")?;
        let len = a.start.arc_length(handle, &a.end)?;
        if len.is_zero() {
            continue;
        }
        let shifted = CirclePoint::Lattice(xl.clone()).sub(handle, &CirclePoint::Lattice(start.clone()))?;
        let y = shifted.require_lattice("x - start")?.value();
        let (c, d) = count_in_initial_arc(handle, &y, &len, n)?;
        depth = depth.max(d);
        u += BigInt::from(c) * a.weight;
    }
    Ok(BirkhoffResult {
        n,
        value: Value { u, v: &f.constant.v * BigInt::from(n) },
        method: Method::Fast,
        depth_used: depth,
        exact_hits: vec![],
        exact_hit_count: 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DkReport {
    pub n_index: usize,
    #[serde(serialize_with = "crate::serde_util::bigint_str")]
    pub q_n: BigInt,
    pub sum: Value,
    /// `|S_{q_n} f(x)|` as a float (the check itself is exact).
    pub abs_sum: f64,
    /// `|μ(f)| q_n + V(f)` as a float.
    pub bound: f64,
    #[serde(serialize_with = "crate::serde_util::bigint_str")]
    pub variation: BigInt,
    pub holds: bool,
}

/// Checks `|S_{q_n} f(x)| <= |μ(f)| q_n + V(f)` exactly.
pub fn denjoy_koksma_check(handle: &AlphaHandle, f: &StepCocycle, x: &CirclePoint, n_index: usize) -> Result<DkReport> {
    let q = handle.q(n_index)?;
    let qn: u64 = q.to_u64().ok_or_else(|| Error::InvalidArgument(format!("q_{n_index} = {q} too large to iterate")))?;
    let res = if x.is_lattice() && f.arcs.iter().all(|a| a.start.is_lattice() && a.end.is_lattice()) {
        birkhoff_fast(handle, f, x, qn)?
    } else {
        birkhoff_naive(handle, f, x, qn)?
    };
    let variation = f.variation();
    let s = res.value.to_real(f.beta.as_ref())?;
    let mu = if f.arcs.is_empty() { LatticeReal::rational(BigRational::from_integer(f.constant.u.clone())) } else { f.integral(handle)? };
    let bound = mu.abs(handle)?.scale(&q).add(&LatticeReal::rational(BigRational::from_integer(variation.clone())));
    let abs_s = s.abs(handle)?;
    let holds = bound.cmp_with(&abs_s, handle)? != Ordering::Less;
    Ok(DkReport {
        n_index,
        q_n: q,
        sum: res.value,
        abs_sum: abs_s.to_f64(handle)?,
        bound: bound.to_f64(handle)?,
        variation,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> AlphaHandle {
        AlphaHandle::golden()
    }

    #[test]
    fn phi_beta_half() {
        let h = g();
        let f = StepCocycle::phi_beta(&h, &CirclePoint::rational(1, 2)).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        let v = f.evaluate(&h, &CirclePoint::rational(1, 4)).unwrap().to_real(f.beta.as_ref()).unwrap();
        assert_eq!(v, LatticeReal::rational(half.clone()));
        let v = f.evaluate(&h, &CirclePoint::rational(3, 4)).unwrap().to_real(f.beta.as_ref()).unwrap();
        assert_eq!(v, LatticeReal::rational(-half));
        assert!(f.integral(&h).unwrap().is_zero());
        assert_eq!(f.variation(), BigInt::from(2));
        // half-open: φ_β(β) = −β
        assert_eq!(f.evaluate(&h, &CirclePoint::rational(1, 2)).unwrap(), Value::new(0, -1));
    }

    #[test]
    fn phi_beta_gamma_half_half() {
        let h = g();
        let half = CirclePoint::rational(1, 2);
        let f = StepCocycle::phi_beta_gamma(&h, &half, &half).unwrap();
        assert_eq!(f.evaluate(&h, &CirclePoint::rational(1, 4)).unwrap(), Value::int(1));
        assert_eq!(f.evaluate(&h, &CirclePoint::rational(3, 4)).unwrap(), Value::int(-1));
        assert_eq!(f.evaluate(&h, &CirclePoint::zero()).unwrap(), Value::int(1));
        assert!(f.integral(&h).unwrap().is_zero());
        // φ_{1/2,1/2} = 2 φ_{1/2}
        let p = StepCocycle::phi_beta(&h, &half).unwrap();
        for k in 1..20 {
            let x = CirclePoint::alpha_multiple(&h, k).unwrap();
            let a = f.evaluate(&h, &x).unwrap().to_real(f.beta.as_ref()).unwrap();
            let b = p.evaluate(&h, &x).unwrap().to_real(p.beta.as_ref()).unwrap().scale(&BigInt::from(2));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn breakpoint_bookkeeping() {
        let h = g();
        let beta = CirclePoint::rational(1, 3);
        let gamma = CirclePoint::rational(1, 5);
        let f = StepCocycle::phi_beta_gamma(&h, &beta, &gamma).unwrap();
        assert_eq!(f.breakpoints.len(), 4);
        assert_eq!(f.variation(), BigInt::from(4));
        // γ = β makes β − γ ≡ 0: three effective breakpoints
        let f = StepCocycle::phi_beta_gamma(&h, &beta, &beta).unwrap();
        assert_eq!(f.breakpoints.len(), 3);
        assert!(f.integral(&h).unwrap().is_zero());
        assert!(matches!(StepCocycle::phi_beta(&h, &CirclePoint::zero()), Err(Error::DegenerateParameter(_))));
        assert!(matches!(StepCocycle::phi_beta(&h, &CirclePoint::rational(1, 1)), Err(Error::DegenerateParameter(_))));
    }

    #[test]
    fn prop32_forms() {
        let h = g();
        let beta = CirclePoint::alpha_multiple(&h, 1).unwrap();
        let f = StepCocycle::prop32(&h, &beta, 1).unwrap();
        assert!(f.breakpoints.is_empty());
        assert_eq!(f.values, vec![Value::int(0)]);
        for a in 2..6 {
            let f = StepCocycle::prop32(&h, &beta, a).unwrap();
            assert!(f.integral(&h).unwrap().is_zero(), "a = {a}");
        }
    }

    #[test]
    fn naive_small_orbit() {
        let h = g();
        let f = StepCocycle::indicator(&h, &CirclePoint::rational(1, 2)).unwrap();
        let r = birkhoff_naive(&h, &f, &CirclePoint::zero(), 3).unwrap();
        assert_eq!(r.value, Value::int(2));
        assert_eq!(birkhoff_naive(&h, &f, &CirclePoint::zero(), 0).unwrap().value, Value::int(0));
        // x = 0 sits on the breakpoint 0
        assert_eq!(r.exact_hit_count, 1);
    }

    #[test]
    fn fast_matches_naive_on_phi_beta_gamma() {
        let h = AlphaHandle::new(crate::contfrac::AlphaSpec::periodic(&[2]));
        let beta = CirclePoint::rational(2, 7);
        let gamma = CirclePoint::alpha_multiple(&h, 3).unwrap();
        let f = StepCocycle::phi_beta_gamma(&h, &beta, &gamma).unwrap();
        let x = crate::circle::parse_point(&h, "lat:1/11+5*alpha").unwrap();
        for n in [0u64, 1, 2, 17, 1000, 4321] {
            let a = birkhoff_naive(&h, &f, &x, n).unwrap();
            let b = birkhoff_fast(&h, &f, &x, n).unwrap();
            assert_eq!(a.value, b.value, "n = {n}");
        }
    }

    #[test]
    fn dk_zero_cocycle() {
        let h = g();
        let r = denjoy_koksma_check(&h, &StepCocycle::zero(), &CirclePoint::zero(), 8).unwrap();
        assert!(r.sum.is_zero() && r.holds);
    }
}
