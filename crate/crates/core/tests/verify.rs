use std::collections::HashSet;

use taukernel_core::verify::{run, run_criterion, VerifyConfig, CRITERIA};

#[test]
fn full_report_enumerates_at_least_twenty_checks() {
    let report = run(&[], &VerifyConfig::default());
    assert!(report.records.len() >= 20, "{}", report.records.len());
    assert_eq!(report.criteria.len(), CRITERIA as usize);
    let ids: HashSet<_> = report.records.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids.len(), report.records.len());
    for c in 1..=CRITERIA {
        assert!(report.criterion(c).unwrap().checks >= 1, "criterion {c}");
    }
    assert_eq!(report.passed, report.failed().next().is_none());
}

#[test]
fn impossible_tolerance_fails_every_inexact_check() {
    let cfg = VerifyConfig { tolerance: Some(1e-16), ..Default::default() };
    let recs = run_criterion(3, &cfg);
    assert!(recs.iter().all(|r| r.tolerance == 1e-16));
    assert!(recs.iter().any(|r| !r.passed));
    assert!(!run(&[3], &cfg).passed);
    assert!(run(&[3], &VerifyConfig::default()).passed);
}

#[test]
fn seed_only_changes_the_random_perturbation() {
    let a = run_criterion(16, &VerifyConfig { seed: 1, ..Default::default() });
    let b = run_criterion(16, &VerifyConfig { seed: 2, ..Default::default() });
    for (x, y) in a.iter().zip(&b) {
        if x.id.ends_with("random") {
            assert_ne!(x.note, y.note);
        } else {
            assert_eq!(x, y);
        }
    }
}

#[test]
fn unknown_criterion_is_empty() {
    assert!(run_criterion(0, &VerifyConfig::default()).is_empty());
    assert!(run_criterion(CRITERIA + 1, &VerifyConfig::default()).is_empty());
}
