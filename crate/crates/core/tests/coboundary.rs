use std::f64::consts::PI;

use cocycle_lab::circle::{parse_point, CirclePoint};
use cocycle_lab::coboundary::testing::{brute_hits, candidate_hits, split_sum, uniqueness_rows};
use cocycle_lab::coboundary::*;
use cocycle_lab::contfrac::{AlphaHandle, AlphaSpec};
use cocycle_lab::ostrowski::{synthesize, OstrowskiDigits};
use cocycle_lab::stepcocycle::StepCocycle;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;

fn silver() -> AlphaHandle {
    AlphaHandle::new(AlphaSpec::periodic(&[2]))
}

/// Midpoint-rule quadrature of `∫ φ(x) e^{−2πinx} dx` for `φ_{1/2,1/2}`.
fn quadrature_half_half(n: i64, m: usize) -> (f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    for j in 0..m {
        let x = (j as f64 + 0.5) / m as f64;
        let v = if x < 0.5 { 1.0 } else { -1.0 };
        let t = -2.0 * PI * n as f64 * x;
        re += v * t.cos();
        im += v * t.sin();
    }
    (re / m as f64, im / m as f64)
}

#[test]
fn coefficient_vanishes_when_a_factor_does() {
    let h = AlphaHandle::golden();
    for g in ["r:1/3", "r:2/7", "lat:0+1*alpha"] {
        let c = fourier_phi_beta_gamma(&h, &CirclePoint::rational(1, 2), &parse_point(&h, g).unwrap(), 2).unwrap();
        assert!(c.value().norm() <= c.radius, "gamma {g}: {c:?}");
    }
}

#[test]
fn coefficient_matches_quadrature() {
    let h = AlphaHandle::golden();
    let half = CirclePoint::rational(1, 2);
    let c = fourier_phi_beta_gamma(&h, &half, &half, 1).unwrap();
    let (re, im) = quadrature_half_half(1, 1 << 16);
    assert!((c.re - re).abs() < 1e-6 && (c.im - im).abs() < 1e-6, "{c:?} vs ({re}, {im})");
    assert!((c.im + 2.0 / PI).abs() < 1e-12 && c.re.abs() < 1e-12);
    for n in [3i64, 5, -7] {
        let c = fourier_phi_beta_gamma(&h, &half, &half, n).unwrap();
        let (re, im) = quadrature_half_half(n, 1 << 16);
        assert!((c.re - re).abs() < 1e-6 && (c.im - im).abs() < 1e-6, "n = {n}");
    }
}

#[test]
fn coefficient_zero_index_rejected() {
    let h = AlphaHandle::golden();
    let half = CirclePoint::rational(1, 2);
    assert!(fourier_phi_beta_gamma(&h, &half, &half, 0).is_err());
}

#[test]
fn parseval_half_half() {
    let h = AlphaHandle::golden();
    let half = CirclePoint::rational(1, 2);
    let r = parseval_check(&h, &half, &half, 10_000).unwrap();
    assert_eq!(r.exact, 1.0);
    assert!(r.holds, "{r:?}");
    // odd coefficients 2/(π n): tail Σ_{|n|>N, odd} 4/(π² n²) ≈ 4/(π² N)
    let expected = 4.0 / (PI * PI * 10_000.0);
    assert!((r.tail - expected).abs() < 0.01 * expected, "{r:?}");
}

#[test]
fn parseval_lattice_parameters() {
    let h = silver();
    let beta = parse_point(&h, "r:2/7").unwrap();
    let gamma = parse_point(&h, "lat:1/5+1*alpha").unwrap();
    let r = parseval_check(&h, &beta, &gamma, 20_000).unwrap();
    assert!(r.holds && r.tail >= 0.0 && r.tail < 1e-3, "{r:?}");
}

/// `Σ_{0<|n|<=N} |ψ̂_n|²` for `ψ = 1_{[0,β)} − β`, whose coefficients are the `h_n` when `γ = α`.
fn indicator_l2_head(beta: f64, n_max: usize) -> f64 {
    (1..=n_max).map(|n| 2.0 * ((PI * n as f64 * beta).sin() / (PI * n as f64)).powi(2)).sum()
}

#[test]
fn transfer_recovers_indicator_when_gamma_is_alpha() {
    let h = AlphaHandle::golden();
    let gamma = CirclePoint::alpha_multiple(&h, 1).unwrap();
    for (spec, b) in [("r:1/3", 1.0 / 3.0), ("r:1/2", 0.5)] {
        let beta = parse_point(&h, spec).unwrap();
        let n = 20_000;
        let sol = solve_transfer(&h, &beta, &gamma, n, 1 << 16).unwrap();
        let ind = StepCocycle::indicator(&h, &beta).unwrap();
        let dist = sol.grid_l2_distance(&h, &ind).unwrap();
        let tail = b * (1.0 - b) - indicator_l2_head(b, n);
        assert!((sol.l2_norm_partial() - indicator_l2_head(b, n)).abs() < 1e-9);
        assert!((dist - tail.sqrt()).abs() < 0.25 * tail.sqrt(), "{spec}: dist {dist}, oracle {}", tail.sqrt());
        assert!(dist <= 0.02);
    }
}

#[test]
fn transfer_residual_decreases_with_order() {
    let h = AlphaHandle::golden();
    let gamma = CirclePoint::alpha_multiple(&h, 1).unwrap();
    let beta = CirclePoint::rational(1, 3);
    let res: Vec<f64> = [100, 1_000, 10_000].iter().map(|&n| solve_transfer(&h, &beta, &gamma, n, 1 << 15).unwrap().residual_l2).collect();
    assert!(res[1] < res[0] && res[2] < res[1], "{res:?}");
    let sol = solve_transfer(&h, &beta, &gamma, 1000, 1 << 12).unwrap();
    assert!(sol.l2_partial_sums.windows(2).all(|w| w[1] >= w[0]));
    assert!(sol.residual_sup >= 0.0 && sol.max_coefficient_radius < 1e-9);
}

#[test]
fn criterion_series_degenerate_and_golden() {
    let h = AlphaHandle::golden();
    let a = CirclePoint::alpha_multiple(&h, 1).unwrap();
    let r = criterion_series(&h, &CirclePoint::zero(), &a, 1000).unwrap();
    assert!(r.partial_sums_hi.iter().all(|&s| s == 0.0));
    let r = h4_series(&h, &CirclePoint::zero(), 1000).unwrap();
    assert!(r.partial_sums_hi.iter().all(|&s| s == 0.0));
    let r = criterion_series(&h, &a, &a, 100_000).unwrap();
    assert!(r.monotone);
    assert!(*r.partial_sums_hi.last().unwrap() <= PI * PI / 3.0, "{r:?}");
    let r = h4_series(&h, &a, 100_000).unwrap();
    assert!(*r.partial_sums_hi.last().unwrap() <= PI * PI / 3.0);
    assert_eq!(r.series_id, "h4");
}

#[test]
fn series_cutoffs_and_gaps() {
    assert_eq!(standard_cutoffs(1000), vec![1, 2, 10, 20, 100, 200, 1000]);
    assert_eq!(standard_cutoffs(250), vec![1, 2, 10, 20, 100, 200, 250]);
    let h = AlphaHandle::golden();
    let third = CirclePoint::rational(1, 3);
    let r = criterion_series(&h, &third, &third, 2000).unwrap();
    let gaps = r.cauchy_gaps(&[10, 100, 1000]).unwrap();
    assert!(gaps.iter().all(|g| g.lo <= g.hi));
    assert!(r.cauchy_gaps(&[3]).is_err());
    assert!(r.enclosure_widths.iter().all(|&w| w >= 0.0));
}

/// Direct reading of the definitions, with `‖kα‖` decided exactly.
fn brute_class(h: &AlphaHandle, k: u64) -> (bool, bool) {
    let kb = BigInt::from(k);
    let mut n = 1;
    while h.q(n + 1).unwrap() <= kb {
        n += 1;
    }
    let qn = h.q(n).unwrap();
    let in_j = (1..=h.partial_quotient(n + 1).unwrap().to_u64().unwrap()).any(|s| BigInt::from(s) * &qn == kb);
    let c = BigRational::new(BigInt::one(), qn * 4);
    let in_jp = norm_alpha_less_than(h, &kb, &c).unwrap();
    (in_j, in_jp)
}

#[test]
fn j_membership_of_multiples() {
    let h = AlphaHandle::new(AlphaSpec::periodic(&[1, 3, 2, 9, 5, 1, 1, 4, 2, 2]));
    let q4 = h.q(4).unwrap().to_u64().unwrap();
    let c = classify(&h, 3 * q4).unwrap();
    assert!(c.in_j && c.block == 4, "{c:?}");
    let c = classify(&h, q4).unwrap();
    assert!(c.in_j && c.in_j_prime);
    let c = classify(&h, q4 + 1).unwrap();
    assert!(!c.in_j);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn classification_matches_definitions(k in 1u64..200_000, which in 0usize..3) {
        let h = match which {
            0 => AlphaHandle::golden(),
            1 => AlphaHandle::new(AlphaSpec::periodic(&[1, 3, 2, 9, 5, 1, 1, 4, 2, 2, 7, 1, 3, 1, 1, 2, 6, 1, 1, 1])),
            _ => AlphaHandle::new("rule:factorial".parse().unwrap()),
        };
        let c = classify(&h, k).unwrap();
        prop_assert_eq!((c.in_j, c.in_j_prime), brute_class(&h, k));
    }
}

#[test]
fn appendix_single_digit() {
    let h = AlphaHandle::golden();
    let digits = OstrowskiDigits::from_pairs(&[(0, 1)]);
    let beta = synthesize(&h, &digits).unwrap();
    let r = appendix_series(&h, &digits, &beta, 1000).unwrap();
    assert!(r.blocks.iter().filter(|b| b.n >= 1).all(|b| b.ell == Some(0)));
    assert!(r.blocks.iter().filter(|b| b.n >= 1).all(|b| b.m.is_none()));
    for id in ["C", "F"] {
        assert!(r.get(id).unwrap().partial_sums_hi.iter().all(|&s| s == 0.0), "{id}");
    }
    // only block 0, where m(0) = 0, feeds H
    let hs = &r.get("H").unwrap().partial_sums_hi;
    assert!(hs[0] > 0.0 && hs.iter().all(|&s| s <= hs[0] * (1.0 + 1e-12)));
    assert_eq!(r.series.len(), 8);
    let c = r.counts;
    assert_eq!(c.j_only + c.j_prime_only + c.both + c.neither, 1000);
    assert!(r.series.iter().all(|s| s.monotone));
}

#[test]
fn appendix_counts_match_classification() {
    let h = silver();
    let digits = OstrowskiDigits::from_pairs(&[(1, 1), (3, 2), (6, 1)]);
    let beta = synthesize(&h, &digits).unwrap();
    let r = appendix_series(&h, &digits, &beta, 3000).unwrap();
    let (mut j, mut jp) = (0, 0);
    for k in 1..=3000 {
        let c = classify(&h, k).unwrap();
        j += c.in_j as u64;
        jp += c.in_j_prime as u64;
    }
    assert_eq!(r.counts.j_only + r.counts.both, j);
    assert_eq!(r.counts.j_prime_only + r.counts.both, jp);
}

#[test]
fn lemma_sums_p_one_and_golden() {
    let h = AlphaHandle::golden();
    let r = lemma_sum_checks(&h, 8, 1).unwrap();
    let head = r.checks.iter().find(|c| c.name == "head-far").unwrap();
    assert_eq!(head.left_hi, 0.0);
    assert!(r.checks.iter().all(|c| c.holds), "{r:?}");
    let r = lemma_sum_checks(&h, 8, 5).unwrap();
    assert!(r.checks.iter().all(|c| c.ratio.is_finite() && c.holds), "{r:?}");
    let tc = r.checks.iter().find(|c| c.name == "tail-constant").unwrap();
    let qn = 34.0;
    assert!(tc.left_hi <= 2.0 / qn * (1.0 + 1.0 / qn));
    assert!(lemma_sum_checks(&h, 8, 0).is_err());
}

#[test]
fn lemma_sums_across_indices() {
    for (h, top) in [(AlphaHandle::golden(), 8), (silver(), 7), (AlphaHandle::new("rule:factorial".parse().unwrap()), 5)] {
        for n in 1..top {
            for p in [1, 2, 3, 7] {
                let r = lemma_sum_checks(&h, n, p).unwrap();
                assert!(r.checks.iter().all(|c| c.holds), "{} n={n} p={p}: {r:?}", h.spec());
            }
        }
    }
}

#[test]
fn lemma14_golden_and_empty() {
    let h = AlphaHandle::golden();
    let r = lemma14_check(&h, 6, 100).unwrap();
    assert!(r.holds_a && r.ratio_hi <= 8.0 && r.violations_b == 0, "{r:?}");
    let r = lemma14_check(&h, 1, 100).unwrap();
    assert_eq!((r.sum_lo, r.sum_hi), (0.0, 0.0));
}

#[test]
fn split_sum_agrees_with_direct() {
    let h = silver();
    let oracle = NormOracle::new(&h).unwrap();
    for n in [12usize, 15] {
        let q = h.q(n).unwrap().to_u64().unwrap();
        let direct = lemma14_check(&h, n, 1).unwrap();
        assert_eq!(direct.method, "direct");
        let (lo, hi, _) = split_sum(&h, n, &oracle, 64).unwrap();
        assert!(lo <= direct.sum_hi && direct.sum_lo <= hi, "n={n} q={q}: [{lo}, {hi}] vs [{}, {}]", direct.sum_lo, direct.sum_hi);
        assert!((hi - lo) / lo < 1e-3, "n={n}");
    }
}

#[test]
fn candidate_hits_match_brute_force() {
    for h in [AlphaHandle::golden(), silver(), AlphaHandle::new(AlphaSpec::periodic(&[1, 3, 2, 9, 5, 1, 1, 4, 12, 2, 2, 30, 1, 1]))] {
        for n in 1..11 {
            let a = uniqueness_rows(&h, n, 100, candidate_hits).unwrap();
            let b = uniqueness_rows(&h, n, 100, brute_hits).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.hits, y.hits, "{} n={n} s={}", h.spec(), x.s);
            }
            assert!(a.iter().all(|r| r.ok));
        }
    }
}

#[test]
fn lemma14_hits_lie_past_quarter() {
    let h = AlphaHandle::new(AlphaSpec::periodic(&[2, 1, 7, 3, 1, 20, 2, 1, 1, 40, 3, 2]));
    for n in 1..10 {
        let r = lemma14_check(&h, n, 100).unwrap();
        let q_next = h.q(n + 1).unwrap();
        for row in &r.rows {
            assert!(row.hits.len() <= 1);
            for k in &row.hits {
                assert!(k * 4 >= q_next);
                let qn = h.q(n).unwrap();
                let (s, rem) = k.div_rem(&qn);
                assert_eq!(s, BigInt::from(row.s));
                assert!(rem >= BigInt::one());
            }
        }
    }
}
