//! The criterion must never certify a false positive: every candidate the
//! filter certifies still has a consecutive QNRNP pair when scanned anyway.

use qnrnp_core::criteria::ratio;
use qnrnp_core::pipeline::{
    apply_criterion_filter, find_consecutive_qnrnps, sieve_initial_list, GridSearch,
    PipelineConfig,
};

#[test]
fn every_certified_candidate_still_has_a_pair() {
    let config = PipelineConfig::default();
    let grid = GridSearch::new(
        13,
        40_112_098_026,
        304_000_000_000_000,
        10_700_000_000_000_000,
    );
    let initial = sieve_initial_list(&grid, &config);
    assert_eq!(initial.len(), 541);
    let (certified, final_list) = apply_criterion_filter(initial, &ratio(1, 4), 0);
    assert_eq!(certified.len(), 186);
    assert_eq!(final_list.len(), 355);
    // certification is only claimed above the candidate's own threshold,
    // which in this interval means the upper part of the list
    let results = qnrnp_core::pipeline::indexed_map(certified, 0, |fc| {
        let pair = find_consecutive_qnrnps(fc.candidate.p, &fc.candidate.pm1, None);
        (fc.candidate.p, pair)
    });
    for (p, pair) in results {
        assert!(pair.is_some(), "certified prime {p} has no pair below (p-1)/2");
    }
}
