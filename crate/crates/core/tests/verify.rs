use cocycle_lab::verify::{run_criterion, FaultInjection, Profile, CRITERIA};

#[test]
fn profiles_parse() {
    assert_eq!("quick".parse::<Profile>().unwrap(), Profile::Quick);
    assert_eq!("full".parse::<Profile>().unwrap(), Profile::Full);
    assert!("medium".parse::<Profile>().is_err());
    assert_eq!(CRITERIA.len(), 12);
}

#[test]
fn quick_profile_cheap_criteria_pass() {
    for id in [1, 2, 3, 7, 12] {
        let r = run_criterion(id, Profile::Quick, &FaultInjection::default());
        assert!(r.passed, "{r}");
        assert!(r.to_string().starts_with("[PASS]"));
    }
}

#[test]
fn corrupted_convergent_fails_criterion_one() {
    let r = run_criterion(1, Profile::Quick, &FaultInjection { convergent: Some(6) });
    assert!(!r.passed);
    assert!(r.detail.contains("recurrence") || r.detail.contains("determinant"), "{}", r.detail);
    assert!(r.to_string().starts_with("[FAIL]"));
}

#[test]
fn unknown_criterion_fails() {
    assert!(!run_criterion(13, Profile::Quick, &FaultInjection::default()).passed);
}
