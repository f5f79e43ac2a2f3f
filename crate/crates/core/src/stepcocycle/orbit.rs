//! Direct orbit evaluation `x_j = x + jα` with a fixed-point fast path.
//!
//! Each arc test is decided in 128-bit fixed point when the margin exceeds the
//! accumulated error; otherwise the orbit point is rebuilt as an exact lattice point
//! and compared exactly. Exact hits on breakpoints are counted and logged.

use num_bigint::BigInt;
use rayon::prelude::*;

use super::{BirkhoffResult, Method, StepCocycle, Value};
use crate::circle::CirclePoint;
use crate::contfrac::AlphaHandle;
use crate::error::Result;
use crate::fixed::{in_arc, Fixed};

const HIT_LOG_CAP: usize = 64;
const CHUNK: u64 = 1 << 16;

struct FixedArc {
    start: Fixed,
    len: Fixed,
    weight: i64,
}

/// Fixed-point images of a cocycle's arcs, for deciding values at many points.
pub struct ArcTable {
    arcs: Vec<FixedArc>,
    constant_u: i64,
}

impl ArcTable {
    pub fn new(handle: &AlphaHandle, f: &StepCocycle) -> Result<Self> {
        let arcs = f
            .arcs
            .iter()
            .map(|a| {
                let s = a.start.fixed(handle)?;
                let e = a.end.fixed(handle)?;
                Ok(FixedArc { start: s, len: e.sub(s), weight: a.weight })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ArcTable { arcs, constant_u: constant_u(f) })
    }

    /// Integer part of `f(x)`, or `None` when `x` is too close to a breakpoint.
    #[inline]
    pub fn eval(&self, x: Fixed) -> Option<i64> {
        let mut u = self.constant_u;
        for a in &self.arcs {
            if in_arc(x, a.start, a.len)? {
                u += a.weight;
            }
        }
        Some(u)
    }
}

/// Evaluates a cocycle along the orbit of one initial point.
pub struct OrbitEngine<'a> {
    handle: &'a AlphaHandle,
    f: &'a StepCocycle,
    x0: CirclePoint,
    x0f: Fixed,
    alpha: Fixed,
    table: ArcTable,
    pub exact_hits: Vec<u64>,
    pub exact_hit_count: u64,
    pub fallbacks: u64,
}

impl<'a> OrbitEngine<'a> {
    pub fn new(handle: &'a AlphaHandle, f: &'a StepCocycle, x0: &CirclePoint) -> Result<Self> {
        let table = ArcTable::new(handle, f)?;
        Ok(OrbitEngine {
            handle,
            f,
            x0: x0.clone(),
            x0f: x0.fixed(handle)?,
            alpha: handle.fixed_alpha()?,
            table,
            exact_hits: vec![],
            exact_hit_count: 0,
            fallbacks: 0,
        })
    }

    /// Integer part of `f(x_j)` (the constant `u` included; the `vβ` part is `f.constant.v`).
    pub fn value_at(&mut self, j: u64) -> Result<i64> {
        let xf = self.point_fixed(j);
        if let Some(u) = self.table.eval(xf) {
            return Ok(u);
        }
        self.fallbacks += 1;
        let x = self.x0.rotate(self.handle, &BigInt::from(j))?;
        if self.f.breakpoints.iter().any(|b| *b == x) {
            self.exact_hit_count += 1;
            if self.exact_hits.len() < HIT_LOG_CAP {
                self.exact_hits.push(j);
            }
        }
        let v = self.f.evaluate(self.handle, &x)?;
        Ok(i64::try_from(&v.u).expect("cocycle value fits in i64"))
    }

    /// `Σ_{j in range} f(x_j)` (integer part), sequentially.
    pub fn sum_range(&mut self, from: u64, to: u64) -> Result<i64> {
        let mut s = 0i64;
        for j in from..to {
            s += self.value_at(j)?;
        }
        Ok(s)
    }

    /// The fixed-point image of `x_j`.
    pub fn point_fixed(&self, j: u64) -> Fixed {
        self.x0f.add(self.alpha.mul_int(j as i128))
    }
}

fn constant_u(f: &StepCocycle) -> i64 {
    i64::try_from(&f.constant.u).expect("cocycle constant fits in i64")
}

/// `φ_n(x) = Σ_{j<n} φ(x + jα)` by direct evaluation of every orbit point.
///
/// Chunks of the orbit are evaluated in parallel; integer partial sums make the
/// result independent of scheduling.
pub fn birkhoff_naive(handle: &AlphaHandle, f: &StepCocycle, x: &CirclePoint, n: u64) -> Result<BirkhoffResult> {
    let chunks: Vec<(u64, u64)> = (0..n.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n))).collect();
    let parts: Vec<(i64, Vec<u64>, u64)> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut e = OrbitEngine::new(handle, f, x)?;
            let s = e.sum_range(a, b)?;
            Ok((s, e.exact_hits, e.exact_hit_count))
        })
        .collect::<Result<_>>()?;
    let mut u = BigInt::from(0);
    let mut hits = Vec::new();
    let mut hit_count = 0;
    for (s, h, c) in parts {
        u += s;
        hit_count += c;
        hits.extend(h);
    }
    hits.truncate(HIT_LOG_CAP);
    Ok(BirkhoffResult {
        n,
        value: Value { u, v: &f.constant.v * BigInt::from(n) },
        method: Method::Naive,
        depth_used: 0,
        exact_hits: hits,
        exact_hit_count: hit_count,
    })
}
