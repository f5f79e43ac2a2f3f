use cocycle_lab::circle::CirclePoint;
use cocycle_lab::coboundary::solve_transfer;
use cocycle_lab::contfrac::{AlphaHandle, AlphaSpec, Expr};
use cocycle_lab::error::Error;
use cocycle_lab::ostrowski::construct_special_beta;
use cocycle_lab::skewsim::*;
use cocycle_lab::stepcocycle::{birkhoff_naive, StepCocycle, Value};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn half() -> CirclePoint {
    CirclePoint::rational(1, 2)
}

fn half_half(h: &AlphaHandle) -> StepCocycle {
    StepCocycle::phi_beta_gamma(h, &half(), &half()).unwrap()
}

fn alpha(h: &AlphaHandle) -> CirclePoint {
    CirclePoint::alpha_multiple(h, 1).unwrap()
}

/// The coboundary `1_{[0,1/3)} − T_α 1_{[0,1/3)}`.
fn coboundary(h: &AlphaHandle) -> StepCocycle {
    StepCocycle::phi_beta_gamma(h, &CirclePoint::rational(1, 3), &alpha(h)).unwrap()
}

#[test]
fn iterate_zero_steps_is_identity() {
    let h = AlphaHandle::golden();
    let s = SkewState { x: seeded_point(3), y: Value::new(5, -2) };
    let r = iterate(&h, &StepCocycle::phi_beta(&h, &half()).unwrap(), &s, 0, &IterateOptions::default()).unwrap();
    assert_eq!(r.state, s);
}

#[test]
fn iterate_first_step_of_half_half() {
    let h = AlphaHandle::golden();
    let r = iterate(&h, &half_half(&h), &SkewState::new(CirclePoint::zero()), 1, &IterateOptions::default()).unwrap();
    assert_eq!(r.state.y, Value::int(1));
    assert_eq!(r.state.x.cmp_repr(&h, &alpha(&h)).unwrap(), std::cmp::Ordering::Equal);
}

#[test]
fn iterate_matches_naive_sums() {
    let h = AlphaHandle::new(AlphaSpec::periodic(&[2]));
    let fs = [
        StepCocycle::phi_beta(&h, &CirclePoint::rational(1, 3)).unwrap(),
        StepCocycle::phi_beta_gamma(&h, &CirclePoint::rational(2, 5), &seeded_point(1)).unwrap(),
        StepCocycle::prop32(&h, &CirclePoint::rational(1, 7), 3).unwrap(),
    ];
    for f in &fs {
        for seed in 0..3 {
            let x = seeded_point(seed);
            for n in [1, 17, 1000] {
                let r = iterate(&h, f, &SkewState::new(x.clone()), n, &IterateOptions::default()).unwrap();
                assert_eq!(r.state.y, birkhoff_naive(&h, f, &x, n).unwrap().value, "seed {seed}, n {n}");
            }
        }
    }
}

#[test]
fn trajectory_has_every_step() {
    let h = AlphaHandle::golden();
    let f = half_half(&h);
    let x = seeded_point(4);
    let opts = IterateOptions { trajectory: true, tail_bound: None };
    let r = iterate(&h, &f, &SkewState::new(x.clone()), 50, &opts).unwrap();
    let t = r.trajectory.unwrap();
    assert_eq!(t.len(), 51);
    assert!(t.iter().enumerate().all(|(i, p)| p.j == i as u64 && (0.0..1.0).contains(&p.x.get())));
    let last = t.last().unwrap();
    assert_eq!(Value::new(last.u, last.v), r.state.y);
    assert!((last.x.get() - r.state.x.to_f64(&h).unwrap()).abs() < 1e-12);
    let y10 = birkhoff_naive(&h, &f, &x, 10).unwrap().value;
    assert_eq!(Value::new(t[10].u, t[10].v), y10);
}

#[test]
fn shadowing_guard_refuses_past_horizon() {
    let h = AlphaHandle::golden();
    let tail = BigRational::new(BigInt::from(1), BigInt::from(1000));
    assert_eq!(shadowing_horizon(&tail), Some(500));
    assert_eq!(shadowing_horizon(&BigRational::from_integer(BigInt::from(0))), None);
    let f = half_half(&h);
    let opts = IterateOptions { trajectory: false, tail_bound: Some(tail) };
    let s = SkewState::new(seeded_point(0));
    assert!(iterate(&h, &f, &s, 500, &opts).is_ok());
    assert!(matches!(iterate(&h, &f, &s, 501, &opts), Err(Error::ShadowingGuard(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn iterate_is_a_flow(seed in 0u64..1000, m in 0u64..400, n in 0u64..400) {
        let h = AlphaHandle::golden();
        let f = StepCocycle::phi_beta_gamma(&h, &CirclePoint::rational(1, 3), &seeded_point(seed + 1)).unwrap();
        let s = SkewState::new(seeded_point(seed));
        let o = IterateOptions::default();
        let a = iterate(&h, &f, &iterate(&h, &f, &s, m, &o).unwrap().state, n, &o).unwrap();
        let b = iterate(&h, &f, &s, m + n, &o).unwrap();
        prop_assert_eq!(a.state, b.state);
    }

    #[test]
    fn tv_is_shift_invariant(seed in 0u64..1000, a in 2u64..8, c in 0u64..8) {
        let h = AlphaHandle::golden();
        let hs = quotient_distribution(&h, &half_half(&h), &[a], 2000, 10, &seeded_point(seed), 2).unwrap();
        let s = hs[0].shifted(c);
        prop_assert!((s.tv - hs[0].tv).abs() < 1e-12);
        prop_assert_eq!(s.total, hs[0].total);
        prop_assert_eq!(s.joint_tv, hs[0].joint_tv);
    }
}

#[test]
fn quotient_by_one_is_uniform() {
    let h = AlphaHandle::golden();
    let hs = quotient_distribution(&h, &half_half(&h), &[1, 4], 10_000, DEFAULT_BURN_IN, &seeded_point(2), 3).unwrap();
    assert_eq!(hs[0].tv, 0.0);
    assert_eq!(hs[0].counts, vec![10_000]);
    for q in &hs {
        assert_eq!(q.counts.iter().sum::<u64>(), q.total);
        assert!(q.tv >= 0.0 && q.tv <= 1.0 - 1.0 / q.modulus as f64);
        assert!(q.joint_tv >= q.tv - 1e-12);
    }
}

#[test]
fn quotient_needs_an_integer_cocycle() {
    let h = AlphaHandle::golden();
    let f = StepCocycle::phi_beta(&h, &CirclePoint::rational(1, 3)).unwrap();
    assert!(quotient_distribution(&h, &f, &[2], 10, 0, &seeded_point(0), 1).is_err());
    assert!(quotient_distribution(&h, &half_half(&h), &[0], 10, 0, &seeded_point(0), 1).is_err());
    assert!(quotient_distribution(&h, &half_half(&h), &[2], 10, 0, &seeded_point(0), 17).is_err());
}

#[test]
fn quotient_counts_match_the_trajectory() {
    let h = AlphaHandle::new(AlphaSpec::periodic(&[1, 2]));
    let f = StepCocycle::phi_beta_gamma(&h, &CirclePoint::rational(1, 3), &seeded_point(8)).unwrap();
    let x = seeded_point(5);
    let (burn, n) = (700u64, 150_000u64);
    let hs = quotient_distribution(&h, &f, &[2, 3, 5], n, burn, &x, 4).unwrap();
    let t = iterate(&h, &f, &SkewState::new(x), burn + n, &IterateOptions { trajectory: true, tail_bound: None }).unwrap().trajectory.unwrap();
    for q in &hs {
        let mut counts = vec![0u64; q.modulus as usize];
        for p in &t[burn as usize..(burn + n) as usize] {
            counts[p.u.rem_euclid(q.modulus as i64) as usize] += 1;
        }
        assert_eq!(counts, q.counts, "modulus {}", q.modulus);
        assert_eq!(q.burn_in, burn);
    }
}

#[test]
fn half_half_equidistributes_mod_two() {
    let h = AlphaHandle::golden();
    let hs = quotient_distribution(&h, &half_half(&h), &[2], 1_000_000, DEFAULT_BURN_IN, &seeded_point(0), 3).unwrap();
    assert!(hs[0].tv <= 0.05, "{:?}", hs[0]);
}

#[test]
fn probe_contrasts_ergodic_and_coboundary() {
    let h = AlphaHandle::golden();
    let p = essential_value_probe(&h, &half_half(&h), ProbeTarget::Value { u: 1, v: 0 }, 3, 200_000, 1).unwrap();
    assert_eq!(p.verdict, "supported");
    assert!(p.cells.iter().all(|c| c.visits > 0));
    let g = coboundary(&h);
    let p = essential_value_probe(&h, &g, ProbeTarget::Value { u: 1, v: 0 }, 3, 200_000, 1).unwrap();
    // only the cell [1/4, 3/8) straddles the jump of ψ = 1_{[0,1/3)}
    assert!(p.cells.iter().all(|c| c.witness.is_none() || c.cell == 2), "{:?}", p.cells);
    assert_eq!(p.verdict, "unsupported at this resolution");
    let p = essential_value_probe(&h, &g, ProbeTarget::Value { u: 0, v: 0 }, 3, 200_000, 1).unwrap();
    assert_eq!(p.verdict, "supported");
    let p = essential_value_probe(&h, &g, ProbeTarget::Infinity { threshold: 3 }, 3, 200_000, 1).unwrap();
    assert_eq!(p.supported_cells, 0);
}

#[test]
fn probe_witnesses_are_genuine() {
    let h = AlphaHandle::golden();
    let f = half_half(&h);
    let p = essential_value_probe(&h, &f, ProbeTarget::Value { u: 2, v: 0 }, 2, 100_000, 9).unwrap();
    for c in &p.cells {
        if let Some((i, n)) = c.witness {
            let xi = p.x0.rotate(&h, &BigInt::from(i)).unwrap();
            assert_eq!(birkhoff_naive(&h, &f, &xi, n).unwrap().value, Value::int(2));
            let cell = |x: &CirclePoint| (x.to_f64(&h).unwrap() * 4.0).floor() as usize;
            assert_eq!(cell(&xi), c.cell);
            assert_eq!(cell(&xi.rotate(&h, &BigInt::from(n)).unwrap()), c.cell);
        }
    }
}

#[test]
fn probe_is_reproducible_and_validated() {
    let h = AlphaHandle::golden();
    let f = half_half(&h);
    let a = essential_value_probe(&h, &f, ProbeTarget::Value { u: 1, v: 0 }, 2, 5_000, 42).unwrap();
    let b = essential_value_probe(&h, &f, ProbeTarget::Value { u: 1, v: 0 }, 2, 5_000, 42).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(essential_value_probe(&h, &f, ProbeTarget::Value { u: 1, v: 0 }, 0, 5_000, 42).is_err());
    assert!(essential_value_probe(&h, &f, ProbeTarget::Value { u: 1, v: 0 }, 2, 0, 42).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn probe_support_grows_with_n(seed in 0u64..100, n in 100u64..20_000, u in 0i64..3) {
        let h = AlphaHandle::golden();
        let f = half_half(&h);
        let t = ProbeTarget::Value { u, v: 0 };
        let a = essential_value_probe(&h, &f, t, 3, n, seed).unwrap();
        let b = essential_value_probe(&h, &f, t, 3, 2 * n, seed).unwrap();
        for (x, y) in a.cells.iter().zip(&b.cells) {
            prop_assert!(x.witness.is_none() || x.witness == y.witness);
        }
        prop_assert!(b.supported_cells >= a.supported_cells);
    }
}

#[test]
fn recurrence_of_zero_cocycle() {
    let h = AlphaHandle::golden();
    let r = recurrence_diagnostic(&h, &StepCocycle::zero(), &seeded_point(0), 10_000).unwrap();
    assert_eq!(r.max_excursion, 0.0);
    assert_eq!(r.returns_to_zero, 10_000);
    assert_eq!(r.dk_violations, 0);
    assert!(!r.along_convergents.is_empty());
}

#[test]
fn recurrence_matches_trajectory() {
    let h = AlphaHandle::golden();
    let f = half_half(&h);
    let x = seeded_point(6);
    let n = 100_000;
    let r = recurrence_diagnostic(&h, &f, &x, n).unwrap();
    let t = iterate(&h, &f, &SkewState::new(x), n, &IterateOptions { trajectory: true, tail_bound: None }).unwrap().trajectory.unwrap();
    let max = t[1..].iter().map(|p| p.u.abs()).max().unwrap();
    let returns = t[1..].iter().filter(|p| p.u == 0).count() as u64;
    assert_eq!(r.max_excursion, max as f64);
    assert_eq!(r.returns_to_zero, returns);
}

#[test]
fn recurrence_respects_denjoy_koksma_for_plan_beta() {
    let h = AlphaHandle::new(AlphaSpec::sparse("2n+1", "(n+2)!*22^n", 1).unwrap());
    let plan = construct_special_beta(&h, &Expr::parse("10n").unwrap(), 8).unwrap();
    let (beta, _) = plan.beta(&h, 4).unwrap();
    for g in seeded_gammas(3, 2) {
        let f = StepCocycle::phi_beta_gamma(&h, &beta, &g).unwrap();
        let r = recurrence_diagnostic(&h, &f, &seeded_point(2), 1_000_000).unwrap();
        assert_eq!(r.dk_violations, 0);
        assert!(r.along_convergents.iter().all(|d| d.abs_sum <= 4.0));
    }
}

#[test]
fn commutation_with_exact_transfer() {
    let h = AlphaHandle::golden();
    let beta = CirclePoint::rational(1, 3);
    let phi = StepCocycle::phi_beta(&h, &beta).unwrap();
    let psi = StepCocycle::indicator(&h, &beta).unwrap();
    let r = verify_commutation(&h, &phi, &alpha(&h), &Psi::Step(&psi), 1, 1 << 12).unwrap();
    assert_eq!(r.exact_zero, Some(true));
    assert_eq!(r.residual_sup, 0.0);
    let r = verify_commutation(&h, &phi, &alpha(&h), &Psi::Step(&psi), -1, 1 << 12).unwrap();
    assert_eq!(r.exact_zero, Some(false));
    assert!(r.residual_l2 > 0.1);
    assert!(verify_commutation(&h, &phi, &alpha(&h), &Psi::Step(&psi), 0, 16).is_err());
}

#[test]
fn commutation_with_series_transfer() {
    let h = AlphaHandle::golden();
    let beta = CirclePoint::rational(1, 3);
    let phi = StepCocycle::phi_beta(&h, &beta).unwrap();
    let sol = solve_transfer(&h, &beta, &alpha(&h), 20_000, 1 << 16).unwrap();
    let r = verify_commutation(&h, &phi, &alpha(&h), &Psi::Series(&sol), 1, 0).unwrap();
    assert_eq!(r.grid, 1 << 16);
    assert!(r.exact_zero.is_none());
    assert!(r.residual_l2 <= 0.04, "{r:?}");
}

#[test]
fn half_symmetry_holds_exactly() {
    for h in [AlphaHandle::golden(), AlphaHandle::new(AlphaSpec::periodic(&[2]))] {
        let r = symmetry_check(&h, 10_000, 7).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.points, 10_000);
    }
}

#[test]
fn prop32_diagnostics() {
    let h = AlphaHandle::golden();
    let x = seeded_point(1);
    let r = prop32_diagnostic(&h, &CirclePoint::rational(1, 3), 1, 10_000, &x).unwrap();
    assert!(r.integral_zero);
    assert_eq!(r.recurrence.max_excursion, 0.0);
    let r = prop32_diagnostic(&h, &CirclePoint::rational(1, 3), 2, 100_000, &x).unwrap();
    assert!(r.integral_zero);
    assert_eq!(r.recurrence.dk_violations, 0);
    assert!(r.recurrence.max_excursion > 0.0);
}
