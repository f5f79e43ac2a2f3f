//! Exact points of the circle `ℝ/ℤ`.
//!
//! A lattice point is `r + mα mod 1` with `r` rational and `m` an integer. It is
//! stored canonically, with `r + mα ∈ [0, 1)`, so two lattice points are equal
//! exactly when their `(r, m)` pairs are. A decimal point is a rational centre with
//! an error radius; comparisons that fall inside the radius fail with
//! `PrecisionExhausted`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::contfrac::{AlphaHandle, RationalInterval};
use crate::error::{Error, Result};
use crate::fixed::Fixed;

/// The real number `r + mα` (no reduction mod 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeReal {
    pub r: BigRational,
    pub m: BigInt,
}

impl LatticeReal {
    pub fn zero() -> Self {
        LatticeReal { r: BigRational::zero(), m: BigInt::zero() }
    }

    pub fn new(r: BigRational, m: BigInt) -> Self {
        LatticeReal { r, m }
    }

    pub fn rational(r: BigRational) -> Self {
        LatticeReal { r, m: BigInt::zero() }
    }

    pub fn int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    /// `θ_k = q_k α − p_k`.
    pub fn theta(handle: &AlphaHandle, k: isize) -> Result<Self> {
        let (p, q) = handle.convergent(k)?;
        Ok(LatticeReal { r: BigRational::from_integer(-p), m: q })
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.m.is_zero()
    }

    pub fn add(&self, o: &LatticeReal) -> LatticeReal {
        LatticeReal { r: &self.r + &o.r, m: &self.m + &o.m }
    }

    pub fn sub(&self, o: &LatticeReal) -> LatticeReal {
        LatticeReal { r: &self.r - &o.r, m: &self.m - &o.m }
    }

    pub fn neg(&self) -> LatticeReal {
        LatticeReal { r: -&self.r, m: -&self.m }
    }

    pub fn scale(&self, k: &BigInt) -> LatticeReal {
        LatticeReal { r: &self.r * BigRational::from_integer(k.clone()), m: &self.m * k }
    }

    pub fn sign(&self, handle: &AlphaHandle) -> Result<Ordering> {
        handle.sign_of(&self.r, &self.m)
    }

    pub fn cmp_with(&self, o: &LatticeReal, handle: &AlphaHandle) -> Result<Ordering> {
        self.sub(o).sign(handle)
    }

    pub fn abs(&self, handle: &AlphaHandle) -> Result<LatticeReal> {
        Ok(if self.sign(handle)? == Ordering::Less { self.neg() } else { self.clone() })
    }

    pub fn floor(&self, handle: &AlphaHandle) -> Result<BigInt> {
        handle.floor_of(&self.r, &self.m)
    }

    /// Enclosure of width at most `width`.
    pub fn enclose(&self, handle: &AlphaHandle, width: &BigRational) -> Result<RationalInterval> {
        if self.m.is_zero() {
            return Ok(RationalInterval::point(self.r.clone()));
        }
        let mut d = 1;
        loop {
            let e = handle.lattice_enclosure(&self.r, &self.m, d).map_err(|e| match e {
                Error::IndexBeyondSpec { .. } => Error::precision("lattice value enclosure: spec exhausted"),
                other => other,
            })?;
            if &e.width() <= width {
                return Ok(e);
            }
            d += 1;
            if d > handle.max_depth() {
                return Err(Error::precision(format!("enclosure of {self} (depth cap {})", handle.max_depth())));
            }
        }
    }

    pub fn to_f64(&self, handle: &AlphaHandle) -> Result<f64> {
        let w = BigRational::new(BigInt::one(), BigInt::one() << 80u32);
        let e = self.enclose(handle, &w)?;
        Ok(e.midpoint().to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for LatticeReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}*alpha", self.r, self.m)
    }
}

/// Canonical lattice point: `r + mα ∈ [0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    r: BigRational,
    m: BigInt,
}

impl LatticePoint {
    pub fn new(handle: &AlphaHandle, r: BigRational, m: BigInt) -> Result<Self> {
        let fl = handle.floor_of(&r, &m)?;
        Ok(LatticePoint { r: r - BigRational::from_integer(fl), m })
    }

    pub fn rational(r: BigRational) -> Self {
        let fl = r.floor();
        LatticePoint { r: r - fl, m: BigInt::zero() }
    }

    pub fn r(&self) -> &BigRational {
        &self.r
    }

    pub fn m(&self) -> &BigInt {
        &self.m
    }

    /// The representative in `[0, 1)` as a real lattice value.
    pub fn value(&self) -> LatticeReal {
        LatticeReal { r: self.r.clone(), m: self.m.clone() }
    }

    pub fn from_real(handle: &AlphaHandle, x: &LatticeReal) -> Result<Self> {
        Self::new(handle, x.r.clone(), x.m.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.m.is_zero()
    }
}

/// Rational centre with an error radius; the point lies in `[c - ρ, c + ρ]` mod 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecimalPoint {
    pub center: BigRational,
    pub radius: BigRational,
}

impl DecimalPoint {
    /// Parses a decimal literal `0.xxxx`; the radius is half a unit in the last digit.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        let neg = int.starts_with('-');
        let digits: String = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::parse(s, "expected a decimal number"));
        }
        let mut num: BigInt = digits.parse().map_err(|_| Error::parse(s, "expected a decimal number"))?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let radius = BigRational::new(BigInt::one(), BigInt::from(2) * &den);
        let center = BigRational::new(num, den);
        Ok(DecimalPoint { center: &center - center.floor(), radius })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CirclePoint {
    Lattice(LatticePoint),
    Decimal(DecimalPoint),
}

impl CirclePoint {
    pub fn zero() -> Self {
        CirclePoint::Lattice(LatticePoint::rational(BigRational::zero()))
    }

    pub fn rational(p: i64, q: i64) -> Self {
        CirclePoint::Lattice(LatticePoint::rational(BigRational::new(p.into(), q.into())))
    }

    pub fn from_rational(r: BigRational) -> Self {
        CirclePoint::Lattice(LatticePoint::rational(r))
    }

    pub fn lattice(handle: &AlphaHandle, r: BigRational, m: BigInt) -> Result<Self> {
        Ok(CirclePoint::Lattice(LatticePoint::new(handle, r, m)?))
    }

    /// `kα mod 1`.
    pub fn alpha_multiple(handle: &AlphaHandle, k: i64) -> Result<Self> {
        Self::lattice(handle, BigRational::zero(), BigInt::from(k))
    }

    pub fn as_lattice(&self) -> Option<&LatticePoint> {
        match self {
            CirclePoint::Lattice(p) => Some(p),
            CirclePoint::Decimal(_) => None,
        }
    }

    pub fn require_lattice(&self, what: &str) -> Result<&LatticePoint> {
        self.as_lattice()
            .ok_or_else(|| Error::InvalidArgument(format!("{what} must be a lattice point (r + m*alpha)")))
    }

    pub fn is_lattice(&self) -> bool {
        self.as_lattice().is_some()
    }

    /// Enclosure of the `[0, 1)` representative (decimal: centre ± radius).
    pub fn enclose(&self, handle: &AlphaHandle, width: &BigRational) -> Result<RationalInterval> {
        match self {
            CirclePoint::Lattice(p) => p.value().enclose(handle, width),
            CirclePoint::Decimal(d) => {
                Ok(RationalInterval::spanning(&d.center - &d.radius, &d.center + &d.radius))
            }
        }
    }

    pub fn to_f64(&self, handle: &AlphaHandle) -> Result<f64> {
        match self {
            CirclePoint::Lattice(p) => p.value().to_f64(handle),
            CirclePoint::Decimal(d) => Ok(d.center.to_f64().unwrap_or(f64::NAN)),
        }
    }

    pub fn fixed(&self, handle: &AlphaHandle) -> Result<Fixed> {
        match self {
            CirclePoint::Lattice(p) => handle.fixed_of(&p.r, &p.m),
            CirclePoint::Decimal(d) => {
                let mut f = Fixed::from_rational(&d.center);
                let rad: BigInt = (&d.radius * BigRational::from_integer(BigInt::one() << 128u32)).ceil().to_integer();
                f.err = rad.to_u128().unwrap_or(u128::MAX).saturating_add(1);
                Ok(f)
            }
        }
    }

    /// `self + o mod 1`.
    pub fn add(&self, handle: &AlphaHandle, o: &CirclePoint) -> Result<CirclePoint> {
        match (self, o) {
            (CirclePoint::Lattice(a), CirclePoint::Lattice(b)) => {
                Self::lattice(handle, &a.r + &b.r, &a.m + &b.m)
            }
            (CirclePoint::Lattice(a), CirclePoint::Decimal(d)) | (CirclePoint::Decimal(d), CirclePoint::Lattice(a)) => {
                // Enclose the lattice part well inside the decimal radius.
                let w = &d.radius / BigInt::from(1 << 20);
                let e = a.value().enclose(handle, &w)?;
                let c = &d.center + e.midpoint();
                Ok(CirclePoint::Decimal(DecimalPoint { center: &c - c.floor(), radius: &d.radius + e.width() }))
            }
            (CirclePoint::Decimal(a), CirclePoint::Decimal(b)) => {
                let c = &a.center + &b.center;
                Ok(CirclePoint::Decimal(DecimalPoint { center: &c - c.floor(), radius: &a.radius + &b.radius }))
            }
        }
    }

    pub fn neg(&self, handle: &AlphaHandle) -> Result<CirclePoint> {
        match self {
            CirclePoint::Lattice(a) => Self::lattice(handle, -&a.r, -&a.m),
            CirclePoint::Decimal(d) => {
                let c = -&d.center;
                Ok(CirclePoint::Decimal(DecimalPoint { center: &c - c.floor(), radius: d.radius.clone() }))
            }
        }
    }

    pub fn sub(&self, handle: &AlphaHandle, o: &CirclePoint) -> Result<CirclePoint> {
        self.add(handle, &o.neg(handle)?)
    }

    /// `self + kα mod 1`.
    pub fn rotate(&self, handle: &AlphaHandle, k: &BigInt) -> Result<CirclePoint> {
        self.add(handle, &CirclePoint::lattice(handle, BigRational::zero(), k.clone())?)
    }

    /// Compares the `[0, 1)` representatives.
    pub fn cmp_repr(&self, handle: &AlphaHandle, o: &CirclePoint) -> Result<Ordering> {
        match (self, o) {
            (CirclePoint::Lattice(a), CirclePoint::Lattice(b)) => {
                if a == b {
                    return Ok(Ordering::Equal);
                }
                a.value().cmp_with(&b.value(), handle)
            }
            _ => {
                let radius = |p: &CirclePoint| match p {
                    CirclePoint::Decimal(d) => Some(d.radius.clone()),
                    CirclePoint::Lattice(_) => None,
                };
                let r = match (radius(self), radius(o)) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => unreachable!(),
                };
                // Lattice enclosures far below the decimal radius cost nothing extra to decide.
                let w = r / BigInt::from(1u32 << 16);
                let ea = self.enclose(handle, &w)?;
                let eb = o.enclose(handle, &w)?;
                if ea.hi() < eb.lo() {
                    return Ok(Ordering::Less);
                }
                if eb.hi() < ea.lo() {
                    return Ok(Ordering::Greater);
                }
                Err(Error::precision(format!("comparison of {self} with {o} within the decimal error radius")))
            }
        }
    }

    /// Length of the arc `[self, o)` going forward, i.e. `(o - self) mod 1`.
    pub fn arc_length(&self, handle: &AlphaHandle, o: &CirclePoint) -> Result<LatticeReal> {
        match o.sub(handle, self)? {
            CirclePoint::Lattice(p) => Ok(p.value()),
            CirclePoint::Decimal(_) => Err(Error::InvalidArgument("exact arc length needs lattice endpoints".into())),
        }
    }

    /// Membership of `self` in the half-open arc `[start, start + len)`.
    pub fn in_arc(&self, handle: &AlphaHandle, start: &CirclePoint, end: &CirclePoint) -> Result<bool> {
        let t = self.sub(handle, start)?;
        let l = end.sub(handle, start)?;
        if t.cmp_repr(handle, &CirclePoint::zero())? == Ordering::Equal {
            return Ok(!matches!(l.cmp_repr(handle, &CirclePoint::zero())?, Ordering::Equal));
        }
        Ok(t.cmp_repr(handle, &l)? == Ordering::Less)
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CirclePoint::Lattice(p) if p.m.is_zero() => write!(f, "r:{}", p.r),
            CirclePoint::Lattice(p) if p.m.is_negative() => write!(f, "lat:{}{}*alpha", p.r, p.m),
            CirclePoint::Lattice(p) => write!(f, "lat:{}+{}*alpha", p.r, p.m),
            CirclePoint::Decimal(d) => {
                write!(f, "d:{}", crate::serde_util::rational_to_decimal(&d.center, 40))
            }
        }
    }
}

impl Serialize for CirclePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Parses `r:p/q`, `lat:r+m*alpha`, `d:0.xxx` or a bare decimal.
pub fn parse_point(handle: &AlphaHandle, s: &str) -> Result<CirclePoint> {
    let s = s.trim();
    if let Some(body) = s.strip_prefix("r:") {
        return Ok(CirclePoint::from_rational(parse_rational(body)?));
    }
    if let Some(body) = s.strip_prefix("lat:") {
        let body: String = body.chars().filter(|c| !c.is_whitespace()).collect();
        let (r, m) = split_lattice(&body)?;
        return CirclePoint::lattice(handle, r, m);
    }
    if let Some(body) = s.strip_prefix("d:") {
        return Ok(CirclePoint::Decimal(DecimalPoint::parse(body)?));
    }
    if s.contains('.') {
        return Ok(CirclePoint::Decimal(DecimalPoint::parse(s)?));
    }
    Err(Error::parse(s, "expected r:p/q, lat:r+m*alpha or d:<decimal>"))
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| Error::parse(n.trim(), "expected an integer numerator"))?;
    let d: BigInt = d.trim().parse().map_err(|_| Error::parse(d.trim(), "expected an integer denominator"))?;
    if d.is_zero() {
        return Err(Error::parse(s, "zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

/// `r+m*alpha`, `m*alpha`, `r-m*alpha`, `alpha`, or `r`.
fn split_lattice(body: &str) -> Result<(BigRational, BigInt)> {
    let Some(stem) = body.strip_suffix("alpha") else {
        return Ok((parse_rational(body)?, BigInt::zero()));
    };
    let stem = stem.strip_suffix('*').unwrap_or(stem);
    // The coefficient starts after the last '+' or '-' that is not at position 0.
    let cut = stem
        .char_indices()
        .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
        .map(|(i, _)| i)
        .next_back();
    let (r, coef) = match cut {
        Some(i) => (parse_rational(&stem[..i])?, &stem[i..]),
        None => (BigRational::zero(), stem),
    };
    let coef = match coef {
        "" | "+" => BigInt::one(),
        "-" => -BigInt::one(),
        c => c.trim_start_matches('+').parse().map_err(|_| Error::parse(c, "expected an integer coefficient of alpha"))?,
    };
    Ok((r, coef))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let g = AlphaHandle::golden();
        let p = CirclePoint::alpha_multiple(&g, 6).unwrap();
        let l = p.as_lattice().unwrap();
        // 6·0.618… = 3.708…
        assert_eq!(l.r(), &BigRational::from_integer((-3).into()));
        let q = parse_point(&g, "lat:-3+6*alpha").unwrap();
        assert_eq!(p, q);
        assert_eq!(parse_point(&g, "lat:1/2-alpha").unwrap(), parse_point(&g, "lat:3/2-1*alpha").unwrap());
        assert_eq!(parse_point(&g, "lat:alpha").unwrap(), CirclePoint::alpha_multiple(&g, 1).unwrap());
        assert_eq!(parse_point(&g, "r:5/4").unwrap(), CirclePoint::rational(1, 4));
    }

    #[test]
    fn parse_errors() {
        let g = AlphaHandle::golden();
        assert!(matches!(parse_point(&g, "r:1/x"), Err(Error::Parse { .. })));
        assert!(matches!(parse_point(&g, "q:1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn ordering_and_arcs() {
        let g = AlphaHandle::golden();
        let a = CirclePoint::alpha_multiple(&g, 1).unwrap();
        let half = CirclePoint::rational(1, 2);
        assert_eq!(a.cmp_repr(&g, &half).unwrap(), Ordering::Greater);
        assert!(!a.in_arc(&g, &CirclePoint::zero(), &half).unwrap());
        assert!(CirclePoint::zero().in_arc(&g, &CirclePoint::zero(), &half).unwrap());
        assert!(!half.in_arc(&g, &CirclePoint::zero(), &half).unwrap());
        // wrapping arc [0.9, 0.1)
        let s = CirclePoint::rational(9, 10);
        let e = CirclePoint::rational(1, 10);
        assert!(CirclePoint::rational(1, 20).in_arc(&g, &s, &e).unwrap());
        assert!(!CirclePoint::rational(1, 2).in_arc(&g, &s, &e).unwrap());
    }

    #[test]
    fn decimal_comparisons() {
        let g = AlphaHandle::golden();
        let d = parse_point(&g, "d:0.6180339887").unwrap();
        let a = CirclePoint::alpha_multiple(&g, 1).unwrap();
        assert!(matches!(d.cmp_repr(&g, &a), Err(Error::PrecisionExhausted { .. })));
        let d = parse_point(&g, "0.617").unwrap();
        assert_eq!(d.cmp_repr(&g, &a).unwrap(), Ordering::Less);
    }

    #[test]
    fn fixed_image_matches() {
        let g = AlphaHandle::golden();
        let p = parse_point(&g, "lat:1/3+1000000007*alpha").unwrap();
        let f = p.fixed(&g).unwrap();
        assert!((f.to_f64() - p.to_f64(&g).unwrap()).abs() < 1e-15);
    }
}
