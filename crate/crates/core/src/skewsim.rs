//! The cylinder map `T_φ(x, y) = (x + α, y + φ(x))` on `𝕋 × ℤ` and its quotients
//! `𝕋 × ℤ/aℤ`: exact iteration, residue histograms, essential-value probes,
//! recurrence statistics and commutation residuals.
//!
//! Fiber values are exact: an integer pair `(u, v)` stands for `u + vβ`. Orbit points
//! are decided in fixed point with an exact fallback near breakpoints and cell edges.
//! Nothing here decides ergodicity; reports carry the resolution they were run at.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{CirclePoint, LatticeReal};
use crate::coboundary::{step_on_grid, TransferSolution};
use crate::contfrac::AlphaHandle;
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::stepcocycle::{birkhoff_fast, denjoy_koksma_check, DkReport, OrbitEngine, StepCocycle, Value};

/// Steps discarded before histogram collection.
pub const DEFAULT_BURN_IN: u64 = 1_000;
const CHUNK: u64 = 1 << 16;

/// A point of `𝕋 × ℤ` (or `𝕋 × (ℤ + ℤβ)` for `φ_β`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkewState {
    pub x: CirclePoint,
    pub y: Value,
}

impl SkewState {
    pub fn new(x: CirclePoint) -> Self {
        SkewState { x, y: Value::int(0) }
    }
}

/// One trajectory sample: orbit index, `x_j` as a float, fiber value `u + vβ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrajectoryPoint {
    pub j: u64,
    pub x: FloatBits,
    pub u: i64,
    pub v: i64,
}

/// A float stored by its bits so trajectories stay `Eq` and bit-reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FloatBits(pub u64);

impl FloatBits {
    pub fn get(self) -> f64 {
        f64::from_bits(self.0)
    }
}

impl Serialize for FloatBits {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.get())
    }
}

#[derive(Debug, Clone, Default)]
pub struct IterateOptions {
    /// Keep the trajectory `(x_j, y_j)` for `j = 0..=n`.
    pub trajectory: bool,
    /// Tail bound of a truncated parameter; iteration past `shadowing_horizon(tail)` is refused.
    pub tail_bound: Option<BigRational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterateResult {
    pub n: u64,
    pub state: SkewState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    /// Orbit points decided exactly because they sat close to a breakpoint.
    pub fallbacks: u64,
    pub exact_hit_count: u64,
}

/// Largest `n` for which a cocycle built from a truncated parameter with tail bound
/// `t` is trusted: `⌊1/(2t)⌋`. Past it the expected number of orbit points falling
/// between the truncated and the true breakpoint exceeds one half.
pub fn shadowing_horizon(tail_bound: &BigRational) -> Option<u64> {
    if !tail_bound.is_positive() {
        return None;
    }
    let h = (BigRational::one() / (tail_bound * BigInt::from(2))).floor().to_integer();
    Some(h.to_u64().unwrap_or(u64::MAX))
}

fn to_i64(x: &BigInt, what: &str) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::InvalidArgument(format!("{what} = {x} does not fit in 64 bits")))
}

/// `T_φ^n(x, y) = (x + nα, y + φ_n(x))`, exactly.
pub fn iterate(handle: &AlphaHandle, f: &StepCocycle, state: &SkewState, n: u64, opts: &IterateOptions) -> Result<IterateResult> {
    state.x.require_lattice("x")?;
    if let Some(h) = opts.tail_bound.as_ref().and_then(shadowing_horizon) {
        if n > h {
            return Err(Error::ShadowingGuard(format!("{n} steps exceed the shadowing horizon {h} of the truncated parameter")));
        }
    }
    let cv = to_i64(&f.constant.v, "constant beta part")?;
    let (mut u, mut v) = (to_i64(&state.y.u, "y")?, to_i64(&state.y.v, "y")?);
    let mut eng = OrbitEngine::new(handle, f, &state.x)?;
    let mut traj = opts.trajectory.then(|| Vec::with_capacity(n as usize + 1));
    for j in 0..n {
        if let Some(t) = traj.as_mut() {
            t.push(TrajectoryPoint { j, x: FloatBits(eng.point_fixed(j).to_f64().to_bits()), u, v });
        }
        u += eng.value_at(j)?;
        v += cv;
    }
    if let Some(t) = traj.as_mut() {
        t.push(TrajectoryPoint { j: n, x: FloatBits(eng.point_fixed(n).to_f64().to_bits()), u, v });
    }
    Ok(IterateResult {
        n,
        state: SkewState { x: state.x.rotate(handle, &BigInt::from(n))?, y: Value::new(u, v) },
        trajectory: traj,
        fallbacks: eng.fallbacks,
        exact_hit_count: eng.exact_hit_count,
    })
}

/// Dyadic cell `⌊2^d x⌋` of the orbit point `x_j`, exact near cell edges.
fn dyadic_cell(handle: &AlphaHandle, x0: &CirclePoint, j: u64, xf: Fixed, depth: u32) -> Result<usize> {
    let shift = 128 - depth;
    let lo = xf.v.wrapping_sub(xf.err) >> shift;
    let hi = xf.v.wrapping_add(xf.err) >> shift;
    if lo == hi && xf.err < (1u128 << shift) {
        return Ok(lo as usize);
    }
    let p = x0.rotate(handle, &BigInt::from(j))?;
    let lp = p.require_lattice("orbit point")?;
    let scale = BigInt::one() << depth;
    let c = handle.floor_of(&(lp.r() * BigRational::from_integer(scale.clone())), &(lp.m() * &scale))?;
    Ok(c.to_usize().expect("cell index below 2^depth"))
}

/// Runs `visit(j, x_j, cell_or_0, y_j)` for `j` in `[from, to)` with `y_j = φ_j(x0)`
/// (integer part only), chunked in parallel with exact chunk starts.
fn orbit_chunks<A, V, M>(handle: &AlphaHandle, f: &StepCocycle, x0: &CirclePoint, from: u64, to: u64, depth: Option<u32>, init: impl Fn() -> A + Sync + Send, visit: V, merge: M) -> Result<A>
where
    A: Send,
    V: Fn(&mut A, u64, usize, i64) + Sync + Send,
    M: Fn(&mut A, A),
{
    let starts: Vec<u64> = (from..to).step_by(CHUNK as usize).collect();
    let parts: Vec<A> = starts
        .into_par_iter()
        .map(|s| {
            let e = (s + CHUNK).min(to);
            let mut acc = init();
            let mut y = to_i64(&birkhoff_fast(handle, f, x0, s)?.value.u, "Birkhoff sum")?;
            let mut eng = OrbitEngine::new(handle, f, x0)?;
            for j in s..e {
                let cell = match depth {
                    Some(d) => dyadic_cell(handle, x0, j, eng.point_fixed(j), d)?,
                    None => 0,
                };
                visit(&mut acc, j, cell, y);
                y += eng.value_at(j)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut it = parts.into_iter();
    let mut acc = it.next().unwrap_or_else(&init);
    for p in it {
        merge(&mut acc, p);
    }
    Ok(acc)
}

fn require_integer_valued(f: &StepCocycle) -> Result<()> {
    if !f.constant.v.is_zero() {
        return Err(Error::InvalidArgument("quotient statistics need an integer-valued cocycle".into()));
    }
    Ok(())
}

/// Empirical distribution of `y_j mod a`, alone and jointly with the dyadic cell of `x_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientHistogram {
    pub modulus: u64,
    pub counts: Vec<u64>,
    pub total: u64,
    /// `½ Σ_r |counts[r]/total − 1/a|`.
    pub tv: f64,
    pub joint_depth: u32,
    /// Same distance for the pair (cell of `x_j`, `y_j mod a`) against the uniform law.
    pub joint_tv: f64,
    pub burn_in: u64,
}

fn tv_uniform(counts: &[u64], total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let u = 1.0 / counts.len() as f64;
    0.5 * counts.iter().map(|&c| (c as f64 / total as f64 - u).abs()).sum::<f64>()
}

impl QuotientHistogram {
    fn from_counts(modulus: u64, counts: Vec<u64>, joint: &[u64], joint_depth: u32, burn_in: u64) -> Self {
        let total = counts.iter().sum();
        QuotientHistogram { modulus, tv: tv_uniform(&counts, total), joint_tv: tv_uniform(joint, total), counts, total, joint_depth, burn_in }
    }

    /// The histogram of `y + c mod a` (fiber translation by `c`).
    pub fn shifted(&self, c: u64) -> QuotientHistogram {
        let a = self.modulus as usize;
        let mut counts = vec![0; a];
        for (r, &k) in self.counts.iter().enumerate() {
            counts[(r + c as usize) % a] = k;
        }
        // a fiber translation permutes residues inside every cell, so joint_tv is kept
        QuotientHistogram { tv: tv_uniform(&counts, self.total), counts, ..self.clone() }
    }
}

/// Residues of `y_j = φ_j(x0)` for `j ∈ [burn_in, burn_in + n)`, for every modulus at once.
pub fn quotient_distribution(handle: &AlphaHandle, f: &StepCocycle, moduli: &[u64], n: u64, burn_in: u64, x0: &CirclePoint, joint_depth: u32) -> Result<Vec<QuotientHistogram>> {
    require_integer_valued(f)?;
    if moduli.iter().any(|&a| a == 0) {
        return Err(Error::InvalidArgument("moduli must be >= 1".into()));
    }
    if joint_depth > 16 {
        return Err(Error::InvalidArgument("joint depth must be <= 16".into()));
    }
    let cells = 1usize << joint_depth;
    let init = || -> Vec<(Vec<u64>, Vec<u64>)> { moduli.iter().map(|&a| (vec![0u64; a as usize], vec![0u64; a as usize * cells])).collect() };
    let acc = orbit_chunks(
        handle,
        f,
        x0,
        burn_in,
        burn_in + n,
        Some(joint_depth),
        init,
        |acc, _j, cell, y| {
            for (i, &a) in moduli.iter().enumerate() {
                let r = y.rem_euclid(a as i64) as usize;
                acc[i].0[r] += 1;
                acc[i].1[cell * a as usize + r] += 1;
            }
        },
        |acc, other| {
            for (x, o) in acc.iter_mut().zip(other) {
                x.0.iter_mut().zip(o.0).for_each(|(a, b)| *a += b);
                x.1.iter_mut().zip(o.1).for_each(|(a, b)| *a += b);
            }
        },
    )?;
    Ok(moduli.iter().zip(acc).map(|(&a, (c, joint))| QuotientHistogram::from_counts(a, c, &joint, joint_depth, burn_in)).collect())
}

/// What the probe looks for in `φ_n(x)` with `x, T^n x` in the same cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeTarget {
    /// Exact match `φ_n(x) = u + vβ`.
    Value { u: i64, v: i64 },
    /// `|u part of φ_n(x)| >= threshold`, the finite stand-in for `∞`.
    Infinity { threshold: i64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct CellWitness {
    pub cell: usize,
    pub visits: u64,
    /// First witness `(i, n)`: `x_i` and `x_{i+n}` in the cell with the target matched.
    pub witness: Option<(u64, u64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EssentialValueProbe {
    pub target: ProbeTarget,
    pub depth: u32,
    pub n_max: u64,
    pub seed: u64,
    pub x0: CirclePoint,
    pub cells: Vec<CellWitness>,
    pub supported_cells: usize,
    /// `supported` iff every cell has a witness; else `unsupported at this resolution`.
    pub verdict: String,
}

/// Seeded initial point: a rational with denominator `2^64 + 1`, which avoids the
/// dyadic cell edges.
pub fn seeded_point(seed: u64) -> CirclePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k: u64 = rng.gen();
    CirclePoint::from_rational(BigRational::new(BigInt::from(k), (BigInt::one() << 64u32) + 1))
}

/// Seeded parameter draws `k/2^64` with `k` uniform in `[1, 2^64)`.
pub fn seeded_gammas(seed: u64, count: usize) -> Vec<CirclePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k: u64 = rng.gen_range(1..=u64::MAX);
            CirclePoint::from_rational(BigRational::new(BigInt::from(k), BigInt::one() << 64u32))
        })
        .collect()
}

/// Scans one orbit `x_j = x0 + jα`, `j = 0..=n_max`, for pairs `i < j` in the same dyadic
/// cell of depth `d` with `φ_{j−i}(x_i)` matching the target; `x0` comes from `seed`.
pub fn essential_value_probe(handle: &AlphaHandle, f: &StepCocycle, target: ProbeTarget, depth: u32, n_max: u64, seed: u64) -> Result<EssentialValueProbe> {
    if depth == 0 || depth > 16 || n_max == 0 {
        return Err(Error::InvalidArgument("probe needs 1 <= depth <= 16 and n_max >= 1".into()));
    }
    let x0 = seeded_point(seed);
    let cv = to_i64(&f.constant.v, "constant beta part")?;
    let ncell = 1usize << depth;
    let mut seen: Vec<HashMap<(i64, i64), u64>> = vec![HashMap::new(); ncell];
    // (min, index of min, max, index of max) of u per cell
    let mut range: Vec<Option<(i64, u64, i64, u64)>> = vec![None; ncell];
    let mut cells: Vec<CellWitness> = (0..ncell).map(|cell| CellWitness { cell, visits: 0, witness: None }).collect();
    let mut eng = OrbitEngine::new(handle, f, &x0)?;
    let (mut u, mut v) = (0i64, 0i64);
    for j in 0..=n_max {
        let c = dyadic_cell(handle, &x0, j, eng.point_fixed(j), depth)?;
        let cw = &mut cells[c];
        cw.visits += 1;
        if cw.witness.is_none() {
            match target {
                ProbeTarget::Value { u: tu, v: tv } => {
                    if let Some(&i) = seen[c].get(&(u - tu, v - tv)) {
                        cw.witness = Some((i, j - i));
                    }
                    seen[c].entry((u, v)).or_insert(j);
                }
                ProbeTarget::Infinity { threshold } => {
                    let (lo, li, hi, hi_j) = range[c].unwrap_or((u, j, u, j));
                    if u - lo >= threshold {
                        cw.witness = Some((li, j - li));
                    } else if hi - u >= threshold {
                        cw.witness = Some((hi_j, j - hi_j));
                    }
                    let (lo, li) = if u < lo { (u, j) } else { (lo, li) };
                    let (hi, hi_j) = if u > hi { (u, j) } else { (hi, hi_j) };
                    range[c] = Some((lo, li, hi, hi_j));
                }
            }
            if cw.witness.is_some() {
                seen[c] = HashMap::new();
            }
        }
        if j < n_max {
            u += eng.value_at(j)?;
            v += cv;
        }
    }
    let supported_cells = cells.iter().filter(|c| c.witness.is_some()).count();
    let verdict = if supported_cells == ncell { "supported".to_string() } else { "unsupported at this resolution".to_string() };
    Ok(EssentialValueProbe { target, depth, n_max, seed, x0, cells, supported_cells, verdict })
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceReport {
    pub n_max: u64,
    /// `max_{1<=n<=N} |φ_n(x0)|` (float for `φ_β`, exact integer otherwise).
    pub max_excursion: f64,
    /// Number of `1 <= n <= N` with `φ_n(x0) = 0` exactly.
    pub returns_to_zero: u64,
    /// Denjoy–Koksma checks `|φ_{q_k}(x0)| <= |μ| q_k + V` for every `q_k <= N`.
    pub along_convergents: Vec<DkReport>,
    pub dk_violations: usize,
}

/// Excursions and returns of `φ_n(x0)` for `n <= N`, and the bound along `q_k`.
pub fn recurrence_diagnostic(handle: &AlphaHandle, f: &StepCocycle, x0: &CirclePoint, n_max: u64) -> Result<RecurrenceReport> {
    let cv = to_i64(&f.constant.v, "constant beta part")?;
    let beta = match (&f.beta, cv) {
        (Some(b), c) if c != 0 => b.to_f64(handle)?,
        _ => 0.0,
    };
    // (max |y|, returns); y_n = φ_n(x0) is read at the start of step n
    let (max_ex, returns) = orbit_chunks(
        handle,
        f,
        x0,
        1,
        n_max + 1,
        None,
        || (0.0f64, 0u64),
        |acc, j, _, u| {
            let v = cv * j as i64;
            let val = u as f64 + v as f64 * beta;
            acc.0 = acc.0.max(val.abs());
            acc.1 += (u == 0 && v == 0) as u64;
        },
        |acc, o| {
            acc.0 = acc.0.max(o.0);
            acc.1 += o.1;
        },
    )?;
    let mut along = Vec::new();
    let n_big = BigInt::from(n_max);
    let mut k = 1;
    while handle.q(k)? <= n_big {
        along.push(denjoy_koksma_check(handle, f, x0, k)?);
        k += 1;
    }
    let dk_violations = along.iter().filter(|r| !r.holds).count();
    Ok(RecurrenceReport { n_max, max_excursion: max_ex, returns_to_zero: returns, along_convergents: along, dk_violations })
}

/// The candidate transfer function in a commutation check.
pub enum Psi<'a> {
    /// An exact step function.
    Step(&'a StepCocycle),
    /// A truncated Fourier solution; its grid is used.
    Series(&'a TransferSolution),
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutationReport {
    pub gamma: CirclePoint,
    pub epsilon: i8,
    pub grid: usize,
    pub psi: String,
    /// Grid sup and grid-L² of `εφ − T_γφ − (ψ − T_αψ)`.
    pub residual_sup: f64,
    pub residual_l2: f64,
    /// For an exact `ψ`: whether the residual step function vanishes identically.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_zero: Option<bool>,
}

/// Residual of `εφ − T_γφ = ψ − T_αψ` on a grid. Reports only; a large residual for a
/// candidate `ψ` says nothing about whether another `ψ` exists.
pub fn verify_commutation(handle: &AlphaHandle, phi: &StepCocycle, gamma: &CirclePoint, psi: &Psi, epsilon: i8, grid: usize) -> Result<CommutationReport> {
    if epsilon != 1 && epsilon != -1 {
        return Err(Error::InvalidArgument("epsilon must be +1 or -1".into()));
    }
    let lhs = phi.scaled(handle, epsilon as i64)?.minus(handle, &phi.translate(handle, gamma)?)?;
    let alpha = CirclePoint::alpha_multiple(handle, 1)?;
    let (residual, grid, name, exact_zero) = match psi {
        Psi::Step(p) => {
            let cob = p.minus(handle, &p.translate(handle, &alpha)?)?;
            let r = lhs.minus(handle, &cob)?;
            let zero = r.breakpoints.is_empty() && r.values.iter().all(Value::is_zero);
            (step_on_grid(handle, &r, grid)?, grid, "step", Some(zero))
        }
        Psi::Series(s) => {
            let l = step_on_grid(handle, &lhs, s.grid)?;
            (l.iter().zip(&s.coboundary_grid).map(|(a, b)| a - b).collect(), s.grid, "series", None)
        }
    };
    let sup = residual.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let l2 = (residual.iter().map(|x| x * x).sum::<f64>() / grid as f64).sqrt();
    Ok(CommutationReport { gamma: gamma.clone(), epsilon, grid, psi: name.into(), residual_sup: sup, residual_l2: l2, exact_zero })
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub points: usize,
    pub seed: u64,
    pub skipped_breakpoints: usize,
    pub violations: usize,
}

/// `−φ_{1/2}(x) = φ_{1/2}(x + 1/2)` checked exactly at seeded lattice points
/// `r + mα` (`r = k/2^32`, `|m| <= 10^6`), skipping breakpoints.
pub fn symmetry_check(handle: &AlphaHandle, points: usize, seed: u64) -> Result<SymmetryReport> {
    let half = CirclePoint::rational(1, 2);
    let f = StepCocycle::phi_beta(handle, &half)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut skipped, mut violations, mut checked) = (0, 0, 0);
    while checked < points {
        let r = BigRational::new(BigInt::from(rng.gen::<u32>()), BigInt::one() << 32u32);
        let m = BigInt::from(rng.gen_range(-1_000_000i64..=1_000_000));
        let x = CirclePoint::lattice(handle, r, m)?;
        if f.breakpoints.contains(&x) || f.breakpoints.contains(&x.add(handle, &half)?) {
            skipped += 1;
            continue;
        }
        let a = f.evaluate(handle, &x)?.to_real(Some(&half))?.neg();
        let b = f.evaluate(handle, &x.add(handle, &half)?)?.to_real(Some(&half))?;
        if a.sub(&b) != LatticeReal::zero() {
            violations += 1;
        }
        checked += 1;
    }
    Ok(SymmetryReport { points, seed, skipped_breakpoints: skipped, violations })
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop32Report {
    pub a: u64,
    /// `∫φ = aβ − aβ = 0`, checked exactly.
    pub integral_zero: bool,
    #[serde(serialize_with = "crate::serde_util::bigint_str")]
    pub variation: BigInt,
    pub recurrence: RecurrenceReport,
}

/// Recurrence statistics of `a·1_{[0,β)} − 1_{[0,aβ)}` from `x0`.
pub fn prop32_diagnostic(handle: &AlphaHandle, beta: &CirclePoint, a: u64, n_max: u64, x0: &CirclePoint) -> Result<Prop32Report> {
    let f = StepCocycle::prop32(handle, beta, a)?;
    Ok(Prop32Report {
        a,
        integral_zero: f.integral(handle)?.is_zero(),
        variation: f.variation(),
        recurrence: recurrence_diagnostic(handle, &f, x0, n_max)?,
    })
}
