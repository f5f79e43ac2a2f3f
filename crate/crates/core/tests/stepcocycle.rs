use cocycle_lab::circle::CirclePoint;
use cocycle_lab::contfrac::{AlphaHandle, AlphaSpec};
use cocycle_lab::stepcocycle::{birkhoff_fast, birkhoff_naive, denjoy_koksma_check, floor_sum, StepCocycle};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn handles() -> Vec<AlphaHandle> {
    vec![
        AlphaHandle::golden(),
        AlphaHandle::new(AlphaSpec::periodic(&[2])),
        AlphaHandle::new(AlphaSpec::periodic(&[5, 1, 11])),
    ]
}

/// `k/2^20 + mα` with `m` small enough that the point stays exact and cheap.
fn point(h: &AlphaHandle, k: u32, m: i64) -> CirclePoint {
    CirclePoint::lattice(h, BigRational::new(BigInt::from(k % (1 << 20)), BigInt::from(1u32 << 20)), BigInt::from(m)).unwrap()
}

fn nonzero(h: &AlphaHandle, p: CirclePoint) -> Option<CirclePoint> {
    (p.cmp_repr(h, &CirclePoint::zero()).unwrap() != std::cmp::Ordering::Equal).then_some(p)
}

#[test]
fn floor_sum_against_brute_force() {
    for n in 0..30i64 {
        for m in 1..9i64 {
            for a in -20..20i64 {
                for b in -5..5i64 {
                    let brute: i64 = (0..n).map(|i| (a * i + b).div_euclid(m)).sum();
                    let fast = floor_sum(&n.into(), &m.into(), &a.into(), &b.into());
                    assert_eq!(fast, BigInt::from(brute), "n {n} m {m} a {a} b {b}");
                }
            }
        }
    }
}

#[test]
fn phi_beta_gamma_is_zero_mean() {
    let h = AlphaHandle::golden();
    let f = StepCocycle::phi_beta_gamma(&h, &CirclePoint::rational(1, 3), &point(&h, 5, 2)).unwrap();
    assert!(f.integral(&h).unwrap().is_zero());
    assert_eq!(f.variation(), BigInt::from(4));
}

#[test]
fn degenerate_parameters_are_rejected() {
    let h = AlphaHandle::golden();
    assert!(StepCocycle::phi_beta(&h, &CirclePoint::zero()).is_err());
    assert!(StepCocycle::phi_beta_gamma(&h, &CirclePoint::rational(1, 2), &CirclePoint::rational(1, 1)).is_err());
}

#[test]
fn denjoy_koksma_along_convergents() {
    let h = AlphaHandle::new(AlphaSpec::periodic(&[2]));
    let f = StepCocycle::indicator(&h, &point(&h, 77, 3)).unwrap();
    for n in 1..20 {
        let r = denjoy_koksma_check(&h, &f, &point(&h, 1234, -5), n).unwrap();
        assert!(r.holds, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_matches_naive(which in 0usize..3, kb in any::<u32>(), mb in -50i64..50, kg in any::<u32>(), mg in -50i64..50,
                          kx in any::<u32>(), mx in -1000i64..1000, n in 0u64..20_000) {
        let h = &handles()[which];
        let (Some(beta), Some(gamma)) = (nonzero(h, point(h, kb, mb)), nonzero(h, point(h, kg, mg))) else { return Ok(()) };
        let x = point(h, kx, mx);
        for f in [StepCocycle::phi_beta_gamma(h, &beta, &gamma).unwrap(), StepCocycle::indicator(h, &beta).unwrap()] {
            let fast = birkhoff_fast(h, &f, &x, n).unwrap();
            let naive = birkhoff_naive(h, &f, &x, n).unwrap();
            prop_assert_eq!(fast.value, naive.value);
        }
    }

    #[test]
    fn cocycle_identity(which in 0usize..3, kb in any::<u32>(), mb in -50i64..50, kx in any::<u32>(), mx in -1000i64..1000,
                        m in 0u64..100_000, n in 0u64..100_000) {
        let h = &handles()[which];
        let Some(beta) = nonzero(h, point(h, kb, mb)) else { return Ok(()) };
        let f = StepCocycle::phi_beta(h, &beta).unwrap();
        let x = point(h, kx, mx);
        let whole = birkhoff_fast(h, &f, &x, m + n).unwrap().value;
        let head = birkhoff_fast(h, &f, &x, m).unwrap().value;
        let moved = x.rotate(h, &BigInt::from(m)).unwrap();
        let rest = birkhoff_fast(h, &f, &moved, n).unwrap().value;
        prop_assert_eq!(whole, head.add(&rest));
    }

    #[test]
    fn phi_beta_gamma_is_a_difference(which in 0usize..3, kb in any::<u32>(), mb in -50i64..50, kg in any::<u32>(), mg in -50i64..50,
                                      kx in any::<u32>(), mx in -1000i64..1000) {
        let h = &handles()[which];
        let (Some(beta), Some(gamma)) = (nonzero(h, point(h, kb, mb)), nonzero(h, point(h, kg, mg))) else { return Ok(()) };
        let x = point(h, kx, mx);
        let fbg = StepCocycle::phi_beta_gamma(h, &beta, &gamma).unwrap();
        let fb = StepCocycle::phi_beta(h, &beta).unwrap();
        let want = fb.evaluate(h, &x).unwrap().sub(&fb.evaluate(h, &x.add(h, &gamma).unwrap()).unwrap());
        prop_assert_eq!(&want.v, &BigInt::zero());
        prop_assert_eq!(fbg.evaluate(h, &x).unwrap(), want);
    }
}
