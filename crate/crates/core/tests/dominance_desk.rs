use std::time::Instant;

use peakshare_core::axioms::{AxiomLab, Verdict};
use peakshare_core::dominance::{
    check_domination, pusp_probe, uniqueness_spotcheck, Relation, DEFAULT_BUDGET,
};
use peakshare_core::{make_economy, make_grid, Error, Rational, RuleSpec};

#[test]
fn desk_scale_probes_and_uniqueness() {
    let e = make_economy(2, vec![Rational::from(18), Rational::from(12)], 3).unwrap();
    let g = make_grid(&e, 5).unwrap();
    let lab = AxiomLab::new(&e, &g).unwrap();

    let start = Instant::now();
    let u = pusp_probe(&RuleSpec::Uniform, &lab, DEFAULT_BUDGET).unwrap();
    assert!(u.is_certified(), "{:?}", u.note);
    let s = pusp_probe(&RuleSpec::skewed_sequential(&e), &lab, DEFAULT_BUDGET).unwrap();
    assert!(s.is_certified(), "{:?}", s.note);
    assert!(matches!(
        pusp_probe(&RuleSpec::constant_equal_division(&e), &lab, DEFAULT_BUDGET),
        Err(Error::HypothesesNotCertified { .. })
    ));
    eprintln!("probes: {:?}", start.elapsed());

    let start = Instant::now();
    let report = uniqueness_spotcheck(&lab, None, false, DEFAULT_BUDGET).unwrap();
    assert_eq!(report.verdict, Verdict::CertifiedOnGrid, "{report:#?}");
    assert_eq!(report.survivors, vec!["uniform".to_string()]);
    eprintln!("uniqueness: {:?}", start.elapsed());

    let start = Instant::now();
    let v = check_domination(&RuleSpec::Uniform, &RuleSpec::constant_equal_division(&e), &lab, None)
        .unwrap();
    assert_eq!(v.relation, Relation::ADominatesB);
    eprintln!("domination: {:?}", start.elapsed());
}
