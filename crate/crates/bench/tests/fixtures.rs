use riskweave_bench::{chd_cohort, ivf_records};

#[test]
fn fixtures_have_requested_size() {
    assert_eq!(chd_cohort().len(), 2279);
    assert!(ivf_records(500).len() >= 500);
}
