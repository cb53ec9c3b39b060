use qdarwin::selftest::{run_selftest, SelftestOptions, SUITES};

#[test]
fn every_suite_passes_on_a_fresh_build() {
    let summary = run_selftest(&SelftestOptions::default()).unwrap();
    for s in &summary.suites {
        assert!(s.passed, "{s:?}");
    }
    let names: Vec<&str> = summary.suites.iter().map(|s| s.suite).collect();
    assert_eq!(names, SUITES);
}

#[test]
fn filter_runs_only_the_named_suite() {
    let summary = run_selftest(&SelftestOptions {
        suite: Some("infotheory".into()),
        inject_fault: None,
    })
    .unwrap();
    assert_eq!(summary.suites.len(), 1);
    assert_eq!(summary.suites[0].suite, "infotheory");
    assert!(summary.passed);
}

#[test]
fn injected_fault_fails_only_that_suite() {
    let summary = run_selftest(&SelftestOptions {
        suite: None,
        inject_fault: Some("diamond".into()),
    })
    .unwrap();
    assert!(!summary.passed);
    assert_eq!(summary.failed_suites(), vec!["diamond"]);
}
