//! End-to-end acceptance checks. Prints one line per criterion and exits
//! nonzero if any fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use peakshare_cli::{render, reproduce_builtin, run_scenario, Format, RunOptions};
use peakshare_core::axioms::{check_implications, find_pareto_improvement, replay_witness};
use peakshare_core::dominance::{
    check_domination, default_catalog, first_domination_failure, option_box, pusp_probe,
    search_dominators, uniqueness_spotcheck, Relation, DEFAULT_BUDGET,
};
use peakshare_core::grid::ProfileSpace;
use peakshare_core::rules::{uniform_allocate, uniform_lambdas};
use peakshare_core::{
    make_economy, make_grid, Allocation, Axiom, AxiomLab, Bundle, Economy, Error, PeakGrid,
    PeakProfile, QuadraticPreference, Rational, RuleSpec, Verdict,
};

type Outcome = Result<String, String>;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn b(xs: &[&str]) -> Bundle {
    Bundle::new(xs.iter().map(|s| q(s)).collect())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, format!("took {elapsed:?}, budget {budget:?}"))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn desk() -> (Economy, PeakGrid) {
    let e = make_economy(2, vec![q("18"), q("12")], 3).unwrap();
    let g = make_grid(&e, 5).unwrap();
    (e, g)
}

fn figure1() -> Outcome {
    let e = make_economy(2, vec![q("12"), q("15")], 3).map_err(err)?;
    let peaks = PeakProfile::new(vec![b(&["2", "2"]), b(&["4", "7"]), b(&["8", "4"])]);
    // warm up allocator and caches before timing
    uniform_allocate(&e, &peaks).map_err(err)?;
    let start = Instant::now();
    let alloc = uniform_allocate(&e, &peaks).map_err(err)?;
    let elapsed = start.elapsed();
    let lambdas = uniform_lambdas(&e, &peaks).map_err(err)?;
    let expected = Allocation::new(vec![b(&["2", "4"]), b(&["4", "7"]), b(&["6", "4"])]);
    ensure(alloc == expected, format!("allocation {alloc:?}"))?;
    let levels: Vec<Rational> = lambdas.iter().map(|s| s.lambda).collect();
    ensure(levels == vec![q("6"), q("4")], format!("levels {levels:?}"))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("((2,4),(4,7),(6,4)), levels (6,4), {elapsed:?}"))
}

fn example1() -> Outcome {
    let start = Instant::now();
    let e = make_economy(2, vec![q("18"), q("12")], 2).map_err(err)?;
    let peaks = PeakProfile::new(vec![b(&["13.5", "9"]), b(&["12", "10.5"])]);
    let alloc = uniform_allocate(&e, &peaks).map_err(err)?;
    ensure(
        alloc == Allocation::new(vec![b(&["9", "6"]), b(&["9", "6"])]),
        format!("uniform gave {alloc:?}"),
    )?;
    let prefs = [
        QuadraticPreference::new(peaks.peak(0).clone(), vec![q("1"), q("3")]).map_err(err)?,
        QuadraticPreference::new(peaks.peak(1).clone(), vec![q("3"), q("1")]).map_err(err)?,
    ];
    let search = PeakGrid::with_steps(&e, &[q("0.5"), q("0.5")]).map_err(err)?;
    let found = find_pareto_improvement(&alloc, &prefs, &e, &search)
        .map_err(err)?
        .ok_or("no improvement found on the 0.5 grid")?;
    for (i, p) in prefs.iter().enumerate() {
        ensure(
            p.weakly_prefers(found.share(i), alloc.share(i)).map_err(err)?,
            "reported improvement makes someone worse off",
        )?;
    }
    let trade = Allocation::new(vec![b(&["7.5", "7.5"]), b(&["10.5", "4.5"])]);
    for (i, p) in prefs.iter().enumerate() {
        ensure(
            p.strictly_prefers(trade.share(i), alloc.share(i)).map_err(err)?,
            format!("agent {} does not strictly gain from the trade", i + 1),
        )?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("uniform is equal division and is Pareto-improvable, {elapsed:?}"))
}

fn axiom_matrix() -> Outcome {
    let (e, g) = desk();
    let lab = AxiomLab::new(&e, &g).map_err(err)?;
    let start = Instant::now();
    let verdict = |reports: &[peakshare_core::AxiomReport], a: Axiom| {
        reports.iter().find(|r| r.axiom == a).map(|r| r.verdict)
    };

    let uniform = lab.check_all(&RuleSpec::Uniform, &Axiom::GRID).map_err(err)?;
    for r in &uniform {
        ensure(r.is_certified(), format!("uniform refuted on {}", r.axiom))?;
        ensure(r.profiles_checked == 15_625, format!("{} swept {} profiles", r.axiom, r.profiles_checked))?;
    }

    let prop = lab.check_all(&RuleSpec::Proportional, &[Axiom::StrategyProofness]).map_err(err)?;
    ensure(prop[0].is_refuted(), "proportional certified on strategy-proofness")?;
    ensure(
        replay_witness(&prop[0], &RuleSpec::Proportional, &e, lab.ladder()).map_err(err)?,
        "proportional witness does not replay",
    )?;

    let serial = lab.check_all(&RuleSpec::serial_identity(&e), &Axiom::GRID).map_err(err)?;
    for a in [Axiom::EqualTreatment, Axiom::EgalitarianLowerBound] {
        ensure(verdict(&serial, a) == Some(Verdict::Refuted), format!("serial not refuted on {a}"))?;
    }

    let constant = lab
        .check_all(&RuleSpec::constant_equal_division(&e), &[Axiom::Unanimity])
        .map_err(err)?;
    ensure(constant[0].is_refuted(), "constant certified on unanimity")?;

    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("uniform certifies all 7 axioms; expected refutations found, {elapsed:?}"))
}

fn arb_case() -> impl Strategy<Value = (Economy, usize, usize, Vec<usize>)> {
    (1usize..=2, 2usize..=3)
        .prop_flat_map(|(l, n)| {
            (
                prop::collection::vec(1i64..=12, l),
                Just(n),
                2usize..=3,
                0usize..16,
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
        .prop_map(|(omega, n, points, rule, order)| {
            let e = make_economy(omega.len(), omega.into_iter().map(Rational::from).collect(), n)
                .unwrap();
            (e, points, rule, order)
        })
}

fn implications() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 48,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let result = runner.run(&arb_case(), |(e, points, rule, order)| {
        let grid = make_grid(&e, points).unwrap();
        let lab = AxiomLab::new(&e, &grid).unwrap();
        let mut catalog = default_catalog(&e);
        catalog.push(RuleSpec::serial_with_order(&e, &order));
        let spec = &catalog[rule % catalog.len()];
        let reports = lab.check_all(spec, &Axiom::GRID).unwrap();
        let failures = check_implications(&reports);
        prop_assert!(failures.is_empty(), "{}: {:?}", spec.label(), failures);
        Ok(())
    });
    result.map_err(err)?;
    Ok("no certified premise with a refuted conclusion over 48 random economies".into())
}

fn option_boxes() -> Outcome {
    let mut swept = 0usize;
    for l in 1..=2 {
        for n in 2..=3 {
            let omega: Vec<Rational> = [q("6"), q("4")][..l].to_vec();
            let e = make_economy(l, omega, n).map_err(err)?;
            let grid = make_grid(&e, if l == 1 { 7 } else { 4 }).map_err(err)?;
            let cond = ProfileSpace::new(&grid, n - 1).map_err(err)?;
            let mut reversed: Vec<usize> = (0..n).collect();
            reversed.reverse();
            let rules = [
                RuleSpec::Uniform,
                RuleSpec::serial_identity(&e),
                RuleSpec::serial_with_order(&e, &reversed),
            ];
            for rule in &rules {
                for agent in 0..n {
                    for c in 0..cond.len() {
                        let others = cond.profile(c).peaks().to_vec();
                        let ob = option_box(rule, &e, agent, &others, &grid).map_err(err)?;
                        ensure(
                            ob.valid,
                            format!("{} agent {} others {others:?}: {:?}", rule.label(), agent + 1, ob.violation),
                        )?;
                        swept += 1;
                    }
                }
            }
        }
    }
    let e = make_economy(1, vec![q("10")], 2).map_err(err)?;
    let grid = PeakGrid::with_steps(&e, &[q("1")]).map_err(err)?;
    let hand = option_box(&RuleSpec::Uniform, &e, 0, &[b(&["4"])], &grid).map_err(err)?;
    ensure(
        hand.intervals.lower == b(&["5"]) && hand.intervals.upper == b(&["6"]),
        format!("hand case box {:?}", hand.intervals),
    )?;
    Ok(format!("{swept} option sets are boxes; hand case [5,6]"))
}

fn domination() -> Outcome {
    let (e, g) = desk();
    let lab = AxiomLab::new(&e, &g).map_err(err)?;
    let start = Instant::now();
    let uniform = RuleSpec::Uniform;
    let constant = RuleSpec::constant_equal_division(&e);
    let serial = RuleSpec::serial_identity(&e);
    let full = ProfileSpace::new(&g, e.agents() - 1).map_err(err)?.len();
    let cases = [
        (&uniform, &constant, Relation::ADominatesB),
        (&serial, &uniform, Relation::Incomparable),
        (&uniform, &uniform, Relation::Equivalent),
    ];
    for (a, b, want) in cases {
        let v = check_domination(a, b, &lab, None).map_err(err)?;
        ensure(
            v.relation == want,
            format!("{} vs {}: {:?}, expected {want:?}", a.label(), b.label(), v.relation),
        )?;
        ensure(v.conditioning_profiles == full, "conditioning profiles not fully enumerated")?;
    }
    let (ut, ct) = (lab.table(&uniform).map_err(err)?, lab.table(&constant).map_err(err)?);
    ensure(
        first_domination_failure(&ut, &ct, &lab).is_none(),
        "uniform fails to welfare-dominate constant at some profile",
    )?;
    ensure(
        first_domination_failure(&ct, &ut, &lab).is_some(),
        "constant welfare-dominates uniform",
    )?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!("uniform > constant, serial ~ uniform incomparable, uniform = uniform, {elapsed:?}"))
}

fn probes() -> Outcome {
    let (e, g) = desk();
    let lab = AxiomLab::new(&e, &g).map_err(err)?;
    let catalog = default_catalog(&e);
    for rule in [RuleSpec::Uniform, RuleSpec::skewed_sequential(&e)] {
        let report = pusp_probe(&rule, &lab, DEFAULT_BUDGET).map_err(err)?;
        ensure(report.is_certified(), format!("{}: {:?}", rule.label(), report.note))?;
        let search = search_dominators(&rule, &lab, &catalog, usize::MAX).map_err(err)?;
        ensure(search.found.is_none(), format!("{} dominated", rule.label()))?;
        ensure(
            search.edits_examined == search.edits_available,
            format!("{} edit search truncated", rule.label()),
        )?;
    }
    match pusp_probe(&RuleSpec::constant_equal_division(&e), &lab, DEFAULT_BUDGET) {
        Err(Error::HypothesesNotCertified { failed, .. }) => {
            ensure(failed.iter().any(|f| f == "unanimity"), format!("refused on {failed:?}"))?
        }
        other => return Err(format!("constant not refused: {other:?}")),
    }
    Ok("uniform and skewed sequential undominated; constant refused on unanimity".into())
}

fn uniqueness() -> Outcome {
    let (e, g) = desk();
    let lab = AxiomLab::new(&e, &g).map_err(err)?;
    let report = uniqueness_spotcheck(&lab, None, false, DEFAULT_BUDGET).map_err(err)?;
    ensure(report.verdict == Verdict::CertifiedOnGrid, "verdict not certified")?;
    ensure(report.survivors == ["uniform"], format!("survivors {:?}", report.survivors))?;
    let json = serde_json::to_value(&report).map_err(err)?;
    let first: Vec<(String, Option<String>)> = json["entries"]
        .as_array()
        .ok_or("entries missing")?
        .iter()
        .map(|x| {
            let rule = x["rule"].as_str().unwrap_or_default();
            let family = rule.split('[').next().unwrap_or_default().to_string();
            let reason = x["eliminated_by"][0]["axiom"].as_str().map(str::to_string);
            (family, reason)
        })
        .collect();
    let expected = [
        ("uniform", None),
        ("proportional", Some("strategy-proofness")),
        ("serial", Some("equal-treatment")),
        ("serial", Some("equal-treatment")),
        ("constant", Some("unanimity")),
        ("sequential", Some("equal-treatment")),
    ];
    let expected: Vec<(String, Option<String>)> = expected
        .iter()
        .map(|(r, a)| (r.to_string(), a.map(str::to_string)))
        .collect();
    ensure(first == expected, format!("first reasons {first:?}"))?;
    Ok("uniform is the only survivor; reasons per rule as expected".into())
}

fn determinism() -> Outcome {
    let scenarios = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/scenarios");
    let opts = |workers| RunOptions {
        workers,
        ..RunOptions::default()
    };
    let mut compared = 0;
    for case in peakshare_cli::BUILTIN_CASES {
        for format in [Format::Json, Format::Table] {
            let one = render(&reproduce_builtin(case, &opts(1)).map_err(err)?, format);
            let four = render(&reproduce_builtin(case, &opts(4)).map_err(err)?, format);
            ensure(one == four, format!("builtin {case} differs across worker counts"))?;
            compared += 1;
        }
    }
    for file in ["matrix_small.json", "pusp.json", "dominate.json", "uniqueness_two_agents.json"] {
        let path = scenarios.join(file);
        let one = render(&run_scenario(&path, None, &opts(1)).map_err(err)?, Format::Json);
        let four = render(&run_scenario(&path, None, &opts(4)).map_err(err)?, Format::Json);
        ensure(one == four, format!("{file} differs across worker counts"))?;
        compared += 1;
    }
    Ok(format!("{compared} reports byte-identical with 1 and 4 workers"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("two-commodity uniform example", figure1),
        ("equal division is not efficient", example1),
        ("desk-scale axiom matrix", axiom_matrix),
        ("implication consistency", implications),
        ("option-box structure", option_boxes),
        ("domination verdicts", domination),
        ("dominator probes", probes),
        ("uniqueness spot-check", uniqueness),
        ("determinism across workers", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
