//! Canned reproductions with embedded expected values.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use peakshare_core::axioms::{find_pareto_improvement, replay_witness, Axiom, AxiomLab};
use peakshare_core::dominance::{
    check_domination, option_box, uniqueness_spotcheck, Relation, DEFAULT_BUDGET,
};
use peakshare_core::rules::{uniform_allocate, uniform_lambdas};
use peakshare_core::{
    make_economy, make_grid, Allocation, Bundle, Economy, PeakGrid, PeakProfile,
    QuadraticPreference, Rational, RuleSpec, Verdict,
};

use crate::report::{ResultItem, RunReport, Status};
use crate::{CliError, RunOptions};

pub const BUILTIN_CASES: [&str; 5] = [
    "figure1",
    "example1",
    "serial-et",
    "domination-serial-uniform",
    "uniqueness",
];

fn q(s: &str) -> Rational {
    s.parse().expect("literal rational")
}

fn b(xs: &[&str]) -> Bundle {
    Bundle::new(xs.iter().map(|s| q(s)).collect())
}

fn econ(omega: &[&str], agents: usize) -> Result<Economy, CliError> {
    Ok(make_economy(omega.len(), omega.iter().map(|s| q(s)).collect(), agents)?)
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

struct Golden<'a> {
    report: &'a mut RunReport,
}

impl Golden<'_> {
    fn check(&mut self, name: &str, expected: Value, actual: Value) {
        let pass = expected == actual;
        if !pass {
            self.report.status = Status::GoldenMismatch;
        }
        self.report.results.push(ResultItem::Golden {
            check: name.to_string(),
            pass,
            expected,
            actual,
        });
    }

    fn holds(&mut self, name: &str, cond: bool) {
        self.check(name, json!(true), json!(cond));
    }
}

/// Runs one built-in case. `theorem3` is accepted for `uniqueness`.
pub fn reproduce_builtin(case: &str, opts: &RunOptions) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let canonical = match case {
        "theorem3" => "uniqueness",
        other => other,
    };
    let mut report = RunReport::new("builtin", None);
    report.case = Some(canonical.to_string());
    match canonical {
        "figure1" => figure1(&mut report)?,
        "example1" => example1(&mut report)?,
        "serial-et" => serial_et(&mut report, opts)?,
        "domination-serial-uniform" => domination(&mut report, opts)?,
        "uniqueness" => uniqueness(&mut report, opts)?,
        _ => {
            return Err(CliError::Invalid(format!(
                "unknown builtin case `{case}`; known: {}",
                BUILTIN_CASES.join(", ")
            )))
        }
    }
    if opts.timings {
        report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

fn figure1(report: &mut RunReport) -> Result<(), CliError> {
    let e = econ(&["12", "15"], 3)?;
    let peaks = PeakProfile::new(vec![b(&["2", "2"]), b(&["4", "7"]), b(&["8", "4"])]);
    let alloc = uniform_allocate(&e, &peaks)?;
    let lambdas = uniform_lambdas(&e, &peaks)?;
    report.results.push(ResultItem::allocation(
        "uniform".into(),
        alloc.clone(),
        Some(lambdas.clone()),
    ));
    let mut g = Golden { report };
    g.check(
        "uniform allocation",
        json!([["2/1", "4/1"], ["4/1", "7/1"], ["6/1", "4/1"]]),
        to_json(&alloc),
    );
    g.check(
        "water levels",
        json!(["6/1", "4/1"]),
        to_json(&lambdas.iter().map(|s| s.lambda).collect::<Vec<_>>()),
    );
    g.check(
        "modes",
        json!(["excess-demand", "excess-supply"]),
        to_json(&lambdas.iter().map(|s| s.mode).collect::<Vec<_>>()),
    );
    Ok(())
}

fn example1(report: &mut RunReport) -> Result<(), CliError> {
    let e = econ(&["18", "12"], 2)?;
    let peaks = PeakProfile::new(vec![b(&["13.5", "9"]), b(&["12", "10.5"])]);
    let alloc = uniform_allocate(&e, &peaks)?;
    report
        .results
        .push(ResultItem::allocation("uniform".into(), alloc.clone(), None));

    let prefs = vec![
        QuadraticPreference::new(peaks.peak(0).clone(), vec![q("1"), q("3")])?,
        QuadraticPreference::new(peaks.peak(1).clone(), vec![q("3"), q("1")])?,
    ];
    let search = PeakGrid::with_steps(&e, &[q("0.5"), q("0.5")])?;
    let improvement = find_pareto_improvement(&alloc, &prefs, &e, &search)?;
    let target = Allocation::new(vec![b(&["7.5", "7.5"]), b(&["10.5", "4.5"])]);
    let strictly_better = (0..2)
        .map(|i| prefs[i].strictly_prefers(target.share(i), alloc.share(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let costs = |x: &Allocation| -> Result<Vec<Rational>, CliError> {
        Ok((0..2).map(|i| prefs[i].cost(x.share(i))).collect::<Result<_, _>>()?)
    };

    let mut g = Golden { report };
    g.check(
        "uniform gives equal division",
        json!([["9/1", "6/1"], ["9/1", "6/1"]]),
        to_json(&alloc),
    );
    g.holds("improvement search succeeds", improvement.is_some());
    if let Some(better) = &improvement {
        let weakly = (0..2)
            .map(|i| prefs[i].weakly_prefers(better.share(i), alloc.share(i)))
            .collect::<Result<Vec<_>, _>>()?;
        g.holds("found allocation weakly improves both", weakly.iter().all(|x| *x));
    }
    g.check("costs at uniform", json!(["189/4", "189/4"]), to_json(&costs(&alloc)?));
    g.check("costs at trade", json!(["171/4", "171/4"]), to_json(&costs(&target)?));
    g.holds("trade strictly improves both", strictly_better.iter().all(|x| *x));
    Ok(())
}

fn desk() -> Result<(Economy, PeakGrid), CliError> {
    let e = econ(&["18", "12"], 3)?;
    let g = make_grid(&e, 5)?;
    Ok((e, g))
}

fn serial_et(report: &mut RunReport, opts: &RunOptions) -> Result<(), CliError> {
    let (e, grid) = desk()?;
    let lab = AxiomLab::new(&e, &grid)?.with_workers(opts.workers)?;
    let serial = RuleSpec::serial_identity(&e);
    let reports = lab.check_all(
        &serial,
        &[
            Axiom::StrategyProofness,
            Axiom::EqualTreatment,
            Axiom::EgalitarianLowerBound,
        ],
    )?;
    let replays = reports
        .iter()
        .filter(|r| r.is_refuted())
        .map(|r| replay_witness(r, &serial, &e, lab.ladder()))
        .collect::<Result<Vec<_>, _>>()?;
    let verdicts: Vec<Value> = reports.iter().map(|r| to_json(&r.verdict)).collect();
    report
        .results
        .extend(reports.into_iter().map(ResultItem::Axiom));
    let mut g = Golden { report };
    g.check(
        "serial verdicts (strategy-proofness, equal treatment, egalitarian bound)",
        json!(["certified-on-grid", "refuted", "refuted"]),
        Value::Array(verdicts),
    );
    g.holds("witnesses replay", replays.iter().all(|x| *x));
    Ok(())
}

fn domination(report: &mut RunReport, opts: &RunOptions) -> Result<(), CliError> {
    let e = econ(&["10"], 2)?;
    let grid = PeakGrid::with_steps(&e, &[q("1")])?;
    let lab = AxiomLab::new(&e, &grid)?.with_workers(opts.workers)?;
    let uniform = RuleSpec::Uniform;
    let serial = RuleSpec::serial_identity(&e);
    let constant = RuleSpec::constant_equal_division(&e);
    let others = vec![b(&["4"])];

    let ub = option_box(&uniform, &e, 0, &others, &grid)?;
    let sb = option_box(&serial, &e, 1, &others, &grid)?;
    let su = check_domination(&serial, &uniform, &lab, None)?;
    let uu = check_domination(&uniform, &uniform, &lab, None)?;
    let uc = check_domination(&uniform, &constant, &lab, None)?;

    let relations = [su.relation, uu.relation, uc.relation];
    let boxes = (ub.intervals.clone(), sb.intervals.clone(), ub.valid && sb.valid);
    report.results.push(ResultItem::OptionBox {
        rule: uniform.label(),
        agent: 0,
        others: others.clone(),
        option_box: ub,
    });
    report.results.push(ResultItem::OptionBox {
        rule: serial.label(),
        agent: 1,
        others,
        option_box: sb,
    });
    for v in [su, uu, uc] {
        report.results.push(ResultItem::Domination(v));
    }
    let mut g = Golden { report };
    g.check("uniform box against peak 4", json!([["5/1", "6/1"]]), to_json(&boxes.0));
    g.check("serial last-agent box against peak 4", json!([["6/1", "6/1"]]), to_json(&boxes.1));
    g.holds("swept sets are boxes", boxes.2);
    g.check(
        "relations (serial vs uniform, uniform vs uniform, uniform vs constant)",
        to_json(&[Relation::Incomparable, Relation::Equivalent, Relation::ADominatesB]),
        to_json(&relations),
    );
    Ok(())
}

fn uniqueness(report: &mut RunReport, opts: &RunOptions) -> Result<(), CliError> {
    let (e, grid) = desk()?;
    let lab = AxiomLab::new(&e, &grid)?.with_workers(opts.workers)?;
    let u = uniqueness_spotcheck(&lab, None, false, DEFAULT_BUDGET)?;
    let first_reasons: Vec<Value> = u
        .entries
        .iter()
        .map(|x| {
            json!([
                x.rule.split('[').next().unwrap_or_default(),
                x.eliminated_by.first().map(|r| r.axiom.name())
            ])
        })
        .collect();
    let verdict = u.verdict;
    let survivors = u.survivors.clone();
    report.results.push(ResultItem::Uniqueness(u));
    let mut g = Golden { report };
    g.check("verdict", to_json(&Verdict::CertifiedOnGrid), to_json(&verdict));
    g.check("survivors", json!(["uniform"]), to_json(&survivors));
    g.check(
        "first elimination reason per rule",
        json!([
            ["uniform", null],
            ["proportional", "strategy-proofness"],
            ["serial", "equal-treatment"],
            ["serial", "equal-treatment"],
            ["constant", "unanimity"],
            ["sequential", "equal-treatment"]
        ]),
        Value::Array(first_reasons),
    );
    Ok(())
}
