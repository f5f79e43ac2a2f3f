use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

/// Closed interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RationalInterval {
    /// Interval spanned by two endpoints in either order.
    pub fn spanning(a: BigRational, b: BigRational) -> Self {
        if a <= b {
            RationalInterval { lo: a, hi: b }
        } else {
            RationalInterval { lo: b, hi: a }
        }
    }

    pub fn point(x: BigRational) -> Self {
        RationalInterval { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigInt::from(2)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_subset_of(&self, other: &RationalInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_disjoint(&self, other: &RationalInterval) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    /// `{k * x : x in self}`.
    pub fn scale(&self, k: &BigInt) -> RationalInterval {
        let k = BigRational::from_integer(k.clone());
        RationalInterval::spanning(&self.lo * &k, &self.hi * &k)
    }

    pub fn shift(&self, c: &BigRational) -> RationalInterval {
        RationalInterval { lo: &self.lo + c, hi: &self.hi + c }
    }

    /// Exact image under `u -> ||u||` (distance to the nearest integer).
    pub fn dist_to_integer(&self) -> RationalInterval {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let lo_floor = self.lo.floor();
        // An integer inside the interval pins the minimum at 0.
        let contains_integer = self.hi >= lo_floor.clone() + BigRational::from_integer(1.into()) || self.lo == lo_floor;
        let contains_half = {
            let h = &lo_floor + &half;
            let h = if h < self.lo { h + BigRational::from_integer(1.into()) } else { h };
            h <= self.hi
        };
        let d = |x: &BigRational| {
            let f = x - x.floor();
            let g = BigRational::from_integer(1.into()) - &f;
            if f < g { f } else { g }
        };
        let (a, b) = (d(&self.lo), d(&self.hi));
        let lo = if contains_integer { BigRational::zero() } else if a < b { a.clone() } else { b.clone() };
        let hi = if contains_half { half } else if a > b { a } else { b };
        RationalInterval { lo, hi }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Serialize for RationalInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RationalInterval", 2)?;
        st.serialize_field("lo", &self.lo.to_string())?;
        st.serialize_field("hi", &self.hi.to_string())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn norm_image() {
        let i = RationalInterval::spanning(q(1, 10), q(3, 10));
        assert_eq!(i.dist_to_integer(), RationalInterval::spanning(q(1, 10), q(3, 10)));
        let i = RationalInterval::spanning(q(4, 10), q(7, 10));
        assert_eq!(i.dist_to_integer(), RationalInterval::spanning(q(3, 10), q(1, 2)));
        let i = RationalInterval::spanning(q(-1, 10), q(2, 10));
        assert_eq!(i.dist_to_integer(), RationalInterval::spanning(q(0, 1), q(2, 10)));
        let i = RationalInterval::spanning(q(17, 10), q(18, 10));
        assert_eq!(i.dist_to_integer(), RationalInterval::spanning(q(2, 10), q(3, 10)));
        let i = RationalInterval::spanning(q(-13, 10), q(-12, 10));
        assert_eq!(i.dist_to_integer(), RationalInterval::spanning(q(2, 10), q(3, 10)));
    }
}
