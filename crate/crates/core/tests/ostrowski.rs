use cocycle_lab::circle::CirclePoint;
use cocycle_lab::contfrac::{AlphaHandle, AlphaSpec, Expr};
use cocycle_lab::ostrowski::{construct_special_beta, expand, synthesize, OstrowskiDigits};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn handles() -> Vec<AlphaHandle> {
    vec![
        AlphaHandle::golden(),
        AlphaHandle::new(AlphaSpec::periodic(&[2])),
        AlphaHandle::new(AlphaSpec::periodic(&[3, 1, 7])),
    ]
}

/// The expansion keeps every digit in `0..=a_{j+1}`.
fn admissible(h: &AlphaHandle, d: &OstrowskiDigits) -> bool {
    d.digits.iter().all(|(&j, b)| !b.is_negative() && *b <= BigInt::from(h.partial_quotient(j + 1).unwrap()))
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let t = (a - b).rem_euclid(1.0);
    t.min(1.0 - t)
}

#[test]
fn digits_of_zero_are_empty() {
    let h = AlphaHandle::golden();
    let d = expand(&h, &CirclePoint::zero(), 30).unwrap();
    assert!(d.digits.is_empty());
    assert_eq!(synthesize(&h, &d).unwrap(), CirclePoint::zero());
}

#[test]
fn special_beta_digits_sit_on_the_plan() {
    let h = AlphaHandle::new(AlphaSpec::sparse("3n+1", "(n+2)!*2^n", 1).unwrap());
    let plan = construct_special_beta(&h, &Expr::parse("n").unwrap(), 8).unwrap();
    assert!(plan.recurrence_holds());
    assert!(plan.coprime_violations().is_empty());
    let (beta, digits) = plan.beta(&h, 4).unwrap();
    assert_eq!(synthesize(&h, &digits).unwrap(), beta);
    assert!(admissible(&h, &digits));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiples_of_alpha_round_trip(which in 0usize..3, m in 1i64..1_000_000) {
        let h = &handles()[which];
        let beta = CirclePoint::alpha_multiple(h, m).unwrap();
        let d = expand(h, &beta, 45).unwrap();
        prop_assert!(d.tail_bound.is_zero());
        prop_assert_eq!(d.weight(h).unwrap(), BigInt::from(m));
        prop_assert_eq!(synthesize(h, &d).unwrap(), beta);
        prop_assert!(admissible(h, &d));
    }

    #[test]
    fn rational_points_are_approximated(which in 0usize..3, p in 1i64..1000, horizon in 5usize..30) {
        let h = &handles()[which];
        let beta = CirclePoint::rational(p, 1001);
        let d = expand(h, &beta, horizon).unwrap();
        prop_assert!(admissible(h, &d));
        let got = synthesize(h, &d).unwrap().to_f64(h).unwrap();
        let tail = d.tail_bound.to_f64().unwrap();
        prop_assert!(circle_dist(got, p as f64 / 1001.0) <= tail + 1e-12);
        // the tail shrinks like ‖q_horizon α‖
        let q = h.q(horizon).unwrap().to_f64().unwrap();
        prop_assert!(tail <= 2.0 / q);
    }

    #[test]
    fn synthesize_then_expand_is_stable(which in 0usize..3, raw in prop::collection::vec(0u64..8, 1..12)) {
        let h = &handles()[which];
        let pairs: Vec<(usize, i64)> = raw
            .iter()
            .enumerate()
            .map(|(j, &b)| (j, (b as i64).min(h.partial_quotient(j + 1).unwrap().to_i64().unwrap())))
            .collect();
        let given = OstrowskiDigits::from_pairs(&pairs);
        let beta = synthesize(h, &given).unwrap();
        let d = expand(h, &beta, 20).unwrap();
        prop_assert!(admissible(h, &d));
        prop_assert_eq!(synthesize(h, &d).unwrap(), beta.clone());
        // the greedy digits are a fixed point
        let again = expand(h, &synthesize(h, &d).unwrap(), 20).unwrap();
        prop_assert_eq!(again.digits, d.digits);
    }
}
