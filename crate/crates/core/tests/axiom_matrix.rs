use std::time::Instant;

use peakshare_core::axioms::{check_implications, replay_witness, Axiom, AxiomLab};
use peakshare_core::{make_economy, make_grid, Rational, RuleSpec};

fn desk() -> (peakshare_core::Economy, peakshare_core::PeakGrid) {
    let e = make_economy(2, vec![Rational::from(18), Rational::from(12)], 3).unwrap();
    let g = make_grid(&e, 5).unwrap();
    (e, g)
}

#[test]
fn desk_scale_matrix() {
    let (e, g) = desk();
    let lab = AxiomLab::new(&e, &g).unwrap();
    let start = Instant::now();

    let uniform = lab.check_all(&RuleSpec::Uniform, &Axiom::GRID).unwrap();
    for r in &uniform {
        assert!(r.is_certified(), "uniform refuted on {}: {:?}", r.axiom, r.witness);
        assert_eq!(r.profiles_checked, 15_625);
    }
    assert!(check_implications(&uniform).is_empty());

    let prop = lab.check_all(&RuleSpec::Proportional, &Axiom::GRID).unwrap();
    let sp = &prop[0];
    assert!(sp.is_refuted());
    assert!(replay_witness(sp, &RuleSpec::Proportional, &e, lab.ladder()).unwrap());
    assert!(check_implications(&prop).is_empty());

    let serial = RuleSpec::serial_identity(&e);
    let s = lab.check_all(&serial, &Axiom::GRID).unwrap();
    assert!(s[0].is_certified());
    assert!(s.iter().find(|r| r.axiom == Axiom::EqualTreatment).unwrap().is_refuted());
    assert!(s.iter().find(|r| r.axiom == Axiom::EgalitarianLowerBound).unwrap().is_refuted());
    assert!(check_implications(&s).is_empty());

    let constant = RuleSpec::constant_equal_division(&e);
    let c = lab.check_all(&constant, &Axiom::GRID).unwrap();
    assert!(c.iter().find(|r| r.axiom == Axiom::Unanimity).unwrap().is_refuted());
    assert!(check_implications(&c).is_empty());

    let seq = RuleSpec::skewed_sequential(&e);
    let q = lab.check_all(&seq, &Axiom::GRID).unwrap();
    for r in &q {
        let expect_pass = !matches!(r.axiom, Axiom::EqualTreatment | Axiom::EgalitarianLowerBound);
        assert_eq!(r.is_certified(), expect_pass, "sequential on {}", r.axiom);
    }
    eprintln!("desk matrix: {:?}", start.elapsed());
}
