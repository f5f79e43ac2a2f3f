//! Fourier coefficients of `φ_{β,γ}` and the truncated transfer function.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::norms::EPS;
use crate::circle::CirclePoint;
use crate::contfrac::AlphaHandle;
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::stepcocycle::{ArcTable, StepCocycle};

const TWO_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

/// Numerator and denominator of the grid offset `c`: grid points are `(j + c) / G`.
/// `c = 1/2 + 1/1000003` keeps the grid clear of dyadic and small-denominator breakpoints.
pub const GRID_OFFSET: (u64, u64) = (1_000_005, 2_000_006);

/// `φ̂(n)` with an absolute error radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierCoefficient {
    pub n: i64,
    pub re: f64,
    pub im: f64,
    pub radius: f64,
}

impl FourierCoefficient {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Signed phase in turns, in `[-1/2, 1/2)`, with its error in turns.
#[inline]
fn turns(x: Fixed) -> (f64, f64) {
    ((x.v as i128) as f64 / TWO_128, x.err as f64 / TWO_128)
}

/// `(1 − e^{−2πinβ})(1 − e^{2πinγ}) / (2πin)` from fixed-point images of β and γ.
#[inline]
fn coefficient_from(b: Fixed, g: Fixed, n: i64) -> (Complex64, f64) {
    let (x, dx) = turns(b.mul_int(n as i128));
    let (y, dy) = turns(g.mul_int(n as i128));
    let nf = n as f64;
    // 1 − e^{−2πix} = 2i sin(πx) e^{−iπx} and 1 − e^{2πiy} = −2i sin(πy) e^{iπy}
    let modulus = 2.0 * (PI * x).sin() * (PI * y).sin() / (PI * nf);
    let value = Complex64::from_polar(modulus, PI * (y - x) - PI / 2.0);
    let radius = (2.0 * dx + 2.0 * dy + 2.0 * PI * dx * dy) / nf.abs() + 16.0 * EPS * 2.0 / (PI * nf.abs());
    (value, radius)
}

/// `φ̂_{β,γ}(n)` for `φ_{β,γ} = 1_{[0,β)} − 1_{[0,β)}(· + γ)`.
pub fn fourier_phi_beta_gamma(handle: &AlphaHandle, beta: &CirclePoint, gamma: &CirclePoint, n: i64) -> Result<FourierCoefficient> {
    if n == 0 {
        return Err(Error::InvalidArgument("Fourier index must be nonzero".into()));
    }
    let (v, radius) = coefficient_from(beta.fixed(handle)?, gamma.fixed(handle)?, n);
    Ok(FourierCoefficient { n, re: v.re, im: v.im, radius })
}

/// `1 − e^{2πinα}` with an error bound, refusing divisors not separated from zero.
fn small_divisor(handle: &AlphaHandle, alpha: Fixed, n: i64) -> Result<(Complex64, f64, f64)> {
    let mut z = alpha.mul_int(n as i128);
    if z.err.saturating_mul(1 << 20) > z.v.min(z.v.wrapping_neg()) {
        z = handle.fixed_of(&BigRational::from_integer(0.into()), &BigInt::from(n))?;
    }
    let (t, dt) = turns(z);
    let s = (PI * t).sin();
    let d = Complex64::from_polar(2.0 * s, PI * t - PI / 2.0);
    let err = 2.0 * PI * dt + 4.0 * EPS * d.norm();
    let lo = d.norm() - err;
    if lo <= 0.0 {
        return Err(Error::precision(format!("small divisor 1 - exp(2 pi i n alpha) at n = {n}")));
    }
    Ok((d, err, lo))
}

/// Truncated solution `ψ_N = Σ_{0<|n|≤N} h_n e_n` of `φ_{β,γ} = ψ − ψ∘T_α`.
#[derive(Debug, Clone, Serialize)]
pub struct TransferSolution {
    pub alpha: String,
    pub beta: CirclePoint,
    pub gamma: CirclePoint,
    pub n_max: usize,
    pub grid: usize,
    /// Grid points are `(j + offset) / grid`.
    pub grid_offset: String,
    /// `Σ_{0<|n|≤N} |h_n|²` at the cutoffs `l2_cutoffs`.
    pub l2_cutoffs: Vec<usize>,
    pub l2_partial_sums: Vec<f64>,
    /// Largest error radius among stored `h_n`.
    pub max_coefficient_radius: f64,
    /// Grid sup and grid-L² of `φ − (ψ_N − ψ_N∘T_α)`.
    pub residual_sup: f64,
    pub residual_l2: f64,
    /// Grid sup of `|ψ_N|`.
    pub psi_sup: f64,
    /// `h_n` for `n = 1..=N` (entry `n − 1`); `h_{−n}` is the conjugate.
    #[serde(skip)]
    pub coefficients: Vec<Complex64>,
    #[serde(skip)]
    pub psi_grid: Vec<f64>,
    /// `ψ_N − ψ_N∘T_α` on the grid.
    #[serde(skip)]
    pub coboundary_grid: Vec<f64>,
}

/// The grid point `(j + c) / G` as an exact rational.
pub fn grid_point(j: usize, grid: usize) -> BigRational {
    let (a, b) = GRID_OFFSET;
    BigRational::new(BigInt::from(j as u64) * b + a, BigInt::from(b) * BigInt::from(grid as u64))
}

/// Real trigonometric polynomial `2 Re Σ_{n=1}^{N} a_n e^{2πin x}` on the offset grid.
pub fn fold_to_grid(coeffs: &[Complex64], grid: usize) -> Vec<f64> {
    let (ca, cb) = GRID_OFFSET;
    let den = cb as u128 * grid as u128;
    let mut buckets = vec![Complex64::new(0.0, 0.0); grid];
    for (i, a) in coeffs.iter().enumerate() {
        let n = (i + 1) as u128;
        // e^{2πi n c / G}, reduced exactly before rounding
        let num = (n * ca as u128) % den;
        let phase = 2.0 * PI * (num as f64 / den as f64);
        buckets[(i + 1) % grid] += a * Complex64::from_polar(1.0, phase);
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(grid).process(&mut buckets);
    buckets.iter().map(|z| 2.0 * z.re).collect()
}

/// Values of a step cocycle on the offset grid (integer part; exact near breakpoints).
pub fn step_on_grid(handle: &AlphaHandle, f: &StepCocycle, grid: usize) -> Result<Vec<f64>> {
    let table = ArcTable::new(handle, f)?;
    let beta_f = match &f.beta {
        Some(b) => b.to_f64(handle)?,
        None => 0.0,
    };
    let v = f.constant.v.to_f64().unwrap_or(f64::NAN);
    (0..grid)
        .into_par_iter()
        .map(|j| {
            let x = grid_point(j, grid);
            let u = match table.eval(Fixed::from_rational(&x)) {
                Some(u) => u as f64,
                None => {
                    let val = f.evaluate(handle, &CirclePoint::from_rational(x))?;
                    val.u.to_f64().unwrap_or(f64::NAN)
                }
            };
            Ok(u + v * beta_f)
        })
        .collect()
}

fn l2_cutoffs(n_max: usize) -> Vec<usize> {
    let mut c: Vec<usize> = std::iter::successors(Some(1usize), |x| x.checked_mul(10)).take_while(|&x| x < n_max).collect();
    c.push(n_max);
    c
}

/// Solves `φ_{β,γ} = ψ − ψ∘T_α` up to order `N` and measures the residual on a grid.
pub fn solve_transfer(handle: &AlphaHandle, beta: &CirclePoint, gamma: &CirclePoint, n_max: usize, grid: usize) -> Result<TransferSolution> {
    if n_max == 0 || grid == 0 {
        return Err(Error::InvalidArgument("truncation order and grid size must be positive".into()));
    }
    let phi = StepCocycle::phi_beta_gamma(handle, beta, gamma)?;
    let (bf, gf, af) = (beta.fixed(handle)?, gamma.fixed(handle)?, handle.fixed_alpha()?);
    let terms: Vec<(Complex64, Complex64, f64)> = (1..=n_max as i64)
        .into_par_iter()
        .map(|n| {
            let (c, rc) = coefficient_from(bf, gf, n);
            let (d, ed, dlo) = small_divisor(handle, af, n)?;
            let h = c / d;
            let rh = (rc + h.norm() * ed) / dlo;
            Ok((h, h * d, rh))
        })
        .collect::<Result<_>>()?;
    let coefficients: Vec<Complex64> = terms.iter().map(|t| t.0).collect();
    let cob: Vec<Complex64> = terms.iter().map(|t| t.1).collect();
    let max_coefficient_radius = terms.iter().map(|t| t.2).fold(0.0, f64::max);

    let cutoffs = l2_cutoffs(n_max);
    let mut l2_partial_sums = Vec::with_capacity(cutoffs.len());
    let mut acc = 0.0;
    let mut next = 0;
    for (i, h) in coefficients.iter().enumerate() {
        acc += 2.0 * h.norm_sqr();
        while next < cutoffs.len() && cutoffs[next] == i + 1 {
            l2_partial_sums.push(acc);
            next += 1;
        }
    }

    let psi_grid = fold_to_grid(&coefficients, grid);
    let coboundary_grid = fold_to_grid(&cob, grid);
    let phi_grid = step_on_grid(handle, &phi, grid)?;
    let (mut sup, mut sq) = (0.0f64, 0.0f64);
    for (p, c) in phi_grid.iter().zip(&coboundary_grid) {
        let r = (p - c).abs();
        sup = sup.max(r);
        sq += r * r;
    }
    let psi_sup = psi_grid.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(TransferSolution {
        alpha: handle.spec().to_string(),
        beta: beta.clone(),
        gamma: gamma.clone(),
        n_max,
        grid,
        grid_offset: format!("{}/{}", GRID_OFFSET.0, GRID_OFFSET.1),
        l2_cutoffs: cutoffs,
        l2_partial_sums,
        max_coefficient_radius,
        residual_sup: sup,
        residual_l2: (sq / grid as f64).sqrt(),
        psi_sup,
        coefficients,
        psi_grid,
        coboundary_grid,
    })
}

impl TransferSolution {
    /// `Σ_{0<|n|≤N} |h_n|²`.
    pub fn l2_norm_partial(&self) -> f64 {
        *self.l2_partial_sums.last().unwrap_or(&0.0)
    }

    /// Grid-L² distance between `ψ_N` and the mean-zeroed step function `f`.
    pub fn grid_l2_distance(&self, handle: &AlphaHandle, f: &StepCocycle) -> Result<f64> {
        let vals = step_on_grid(handle, f, self.grid)?;
        let mean = f.integral(handle)?.to_f64(handle)?;
        let sq: f64 = vals.iter().zip(&self.psi_grid).map(|(v, p)| (v - mean - p).powi(2)).sum();
        Ok((sq / self.grid as f64).sqrt())
    }
}

/// `Σ_{0<|n|≤N} |φ̂(n)|²` against the exact `∫ φ²`.
#[derive(Debug, Clone, Serialize)]
pub struct ParsevalReport {
    pub n_max: usize,
    pub partial: f64,
    /// Upper bound on the rounding and enclosure error of `partial`.
    pub partial_error: f64,
    pub exact: f64,
    /// `exact − partial`: the Fourier tail beyond `N`.
    pub tail: f64,
    pub holds: bool,
}

pub fn parseval_check(handle: &AlphaHandle, beta: &CirclePoint, gamma: &CirclePoint, n_max: usize) -> Result<ParsevalReport> {
    let phi = StepCocycle::phi_beta_gamma(handle, beta, gamma)?;
    let exact = phi.integral_of_square(handle)?.to_f64(handle)?;
    let (bf, gf) = (beta.fixed(handle)?, gamma.fixed(handle)?);
    let terms: Vec<(f64, f64)> = (1..=n_max as i64)
        .into_par_iter()
        .map(|n| {
            let (c, r) = coefficient_from(bf, gf, n);
            (2.0 * c.norm_sqr(), 2.0 * (2.0 * c.norm() * r + r * r))
        })
        .collect();
    let partial: f64 = terms.iter().map(|t| t.0).sum();
    let partial_error: f64 = terms.iter().map(|t| t.1).sum::<f64>() + partial * n_max as f64 * EPS;
    Ok(ParsevalReport {
        n_max,
        partial,
        partial_error,
        exact,
        tail: exact - partial,
        holds: partial - partial_error <= exact * (1.0 + EPS),
    })
}
