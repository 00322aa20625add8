//! Scenario runner for the `peakshare` command-line tool.

use std::path::Path;
use std::time::Instant;

use peakshare_core::axioms::{check_implications, AxiomLab};
use peakshare_core::dominance::{
    check_domination, option_box, pusp_probe, uniqueness_spotcheck, DEFAULT_BUDGET,
};
use peakshare_core::rules::uniform_lambdas;
use peakshare_core::{evaluate_rule, Error, RuleSpec};

pub mod builtin;
pub mod report;
pub mod scenario;

pub use builtin::{reproduce_builtin, BUILTIN_CASES};
pub use report::{emit_report, render, ResultItem, RunReport, Status};
pub use scenario::{Command, Format, GridSpec, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Invalid(_) | CliError::Core(_) => 2,
            CliError::Write { .. } => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub workers: usize,
    /// Overrides the scenario's grid with an even grid of this many points.
    pub grid_points: Option<usize>,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: 1,
            grid_points: None,
            timings: false,
        }
    }
}

/// Loads a scenario file and runs its command, or `command` when given.
pub fn run_scenario(path: &Path, command: Option<Command>, opts: &RunOptions) -> Result<RunReport, CliError> {
    let scenario = Scenario::load(path)?;
    run(scenario, command, opts)
}

pub fn run(scenario: Scenario, command: Option<Command>, opts: &RunOptions) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let command = command
        .or_else(|| scenario.command.clone())
        .ok_or_else(|| CliError::Invalid("scenario has no command".into()))?;
    if let Command::Builtin { case } = &command {
        return reproduce_builtin(case, opts);
    }
    scenario.check_rules()?;
    let mut report = RunReport::new(command.name(), Some(scenario.clone()));
    let econ = scenario.economy()?;

    match &command {
        Command::Allocate {} => {
            let peaks = scenario
                .peaks
                .as_ref()
                .ok_or_else(|| CliError::Invalid("allocate needs peaks".into()))?;
            if scenario.rules.is_empty() {
                return Err(CliError::Invalid("allocate needs at least one rule".into()));
            }
            for rule in &scenario.rules {
                let alloc = evaluate_rule(rule, econ, peaks)?;
                let lambdas = match rule {
                    RuleSpec::Uniform => Some(uniform_lambdas(econ, peaks)?),
                    _ => None,
                };
                report
                    .results
                    .push(ResultItem::allocation(rule.label(), alloc, lambdas));
            }
        }
        Command::Check { axioms } => {
            if !axioms.is_empty() && !scenario.rules.is_empty() {
                let grid = scenario.grid(opts.grid_points)?;
                let lab = AxiomLab::new(econ, &grid)?.with_workers(opts.workers)?;
                for rule in &scenario.rules {
                    let reports = lab.check_all(rule, axioms)?;
                    let failures = check_implications(&reports);
                    report.results.extend(reports.into_iter().map(ResultItem::Axiom));
                    if !failures.is_empty() {
                        report.status = Status::Inconsistent;
                        report.results.push(ResultItem::Implications {
                            rule: rule.label(),
                            failures,
                        });
                    }
                }
            }
        }
        Command::OptionBox { agent, others } => {
            let agent = agent
                .checked_sub(1)
                .ok_or_else(|| CliError::Invalid("agents are numbered from 1".into()))?;
            let grid = scenario.grid(opts.grid_points)?;
            for rule in &scenario.rules {
                let ob = option_box(rule, econ, agent, others, &grid)?;
                report.results.push(ResultItem::OptionBox {
                    rule: rule.label(),
                    agent,
                    others: others.clone(),
                    option_box: ob,
                });
            }
        }
        Command::Dominate { conditioning_sample } => {
            let [a, b] = scenario.rules.as_slice() else {
                return Err(CliError::Invalid("dominate needs exactly two rules".into()));
            };
            let grid = scenario.grid(opts.grid_points)?;
            let lab = AxiomLab::new(econ, &grid)?.with_workers(opts.workers)?;
            match check_domination(a, b, &lab, *conditioning_sample) {
                Ok(v) => report.results.push(ResultItem::Domination(v)),
                Err(Error::NotStrategyProof(rule)) => report.results.push(ResultItem::Refused {
                    rule,
                    operation: "dominate".into(),
                    failed: vec!["strategy-proofness".into()],
                }),
                Err(e) => return Err(e.into()),
            }
        }
        Command::Pusp { budget } => {
            let grid = scenario.grid(opts.grid_points)?;
            let lab = AxiomLab::new(econ, &grid)?.with_workers(opts.workers)?;
            for rule in &scenario.rules {
                match pusp_probe(rule, &lab, budget.unwrap_or(DEFAULT_BUDGET)) {
                    Ok(r) => report.results.push(ResultItem::Axiom(r)),
                    Err(Error::HypothesesNotCertified { rule, failed }) => {
                        report.results.push(ResultItem::Refused {
                            rule,
                            operation: "pusp".into(),
                            failed,
                        })
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Command::Uniqueness { non_bossy } => {
            let grid = scenario.grid(opts.grid_points)?;
            let lab = AxiomLab::new(econ, &grid)?.with_workers(opts.workers)?;
            let catalog = (!scenario.rules.is_empty()).then(|| scenario.rules.clone());
            let u = uniqueness_spotcheck(&lab, catalog, *non_bossy, DEFAULT_BUDGET)?;
            report.results.push(ResultItem::Uniqueness(u));
        }
        Command::Builtin { .. } => unreachable!("handled above"),
    }
    if opts.timings {
        report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}
