use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use peakshare_cli::{
    emit_report, reproduce_builtin, run_scenario, CliError, Command, Format, RunOptions, RunReport,
    Scenario, BUILTIN_CASES,
};
use peakshare_core::Axiom;

#[derive(Parser)]
#[command(name = "peakshare", version, about = "Exact allocation rules and axiom checks for single-peaked economies")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Output format; defaults to the scenario's `format`, else json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for grid sweeps.
    #[arg(long, global = true, env = "PEAKSHARE_WORKERS", default_value_t = 1)]
    workers: usize,

    /// Replace the scenario grid by an even grid with this many points per axis.
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Include elapsed wall time in the report.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the command stored in the scenario file.
    Run(ScenarioArg),
    /// Evaluate every rule at the scenario's peaks.
    Allocate(ScenarioArg),
    /// Sweep axioms over the grid.
    Check {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Comma-separated axiom names; overrides the scenario.
        #[arg(long, value_delimiter = ',')]
        axioms: Option<Vec<Axiom>>,
    },
    /// Option box of one agent given the others' peaks (from the scenario).
    OptionBox(ScenarioArg),
    /// Compare the scenario's two rules by option-set nesting.
    Dominate(ScenarioArg),
    /// Search for a strategy-proof dominator of each rule.
    Pusp(ScenarioArg),
    /// Which catalog rules pass strategy-proofness, the dominator probe,
    /// equal treatment and replacement monotonicity.
    #[command(alias = "theorem3")]
    Uniqueness {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Check non-bossiness instead of replacement monotonicity.
        #[arg(long)]
        non_bossy: bool,
    },
    /// Reproduce a built-in case and compare against expected values.
    Builtin {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(
            BUILTIN_CASES.iter().copied().chain(["theorem3"])
        ))]
        case: String,
    },
}

/// The scenario's own command when it has the requested kind, else the
/// kind with default parameters.
fn pick(path: &PathBuf, default: Command) -> Result<(PathBuf, Option<Command>), CliError> {
    let stored = Scenario::load(path)?.command;
    let cmd = match stored {
        Some(c) if std::mem::discriminant(&c) == std::mem::discriminant(&default) => c,
        _ => default,
    };
    Ok((path.clone(), Some(cmd)))
}

fn execute(cli: &Cli, opts: &RunOptions) -> Result<(RunReport, Option<Format>), CliError> {
    let (path, cmd) = match &cli.command {
        Cmd::Builtin { case } => return Ok((reproduce_builtin(case, opts)?, None)),
        Cmd::Run(s) => (s.scenario.clone(), None),
        Cmd::Allocate(s) => pick(&s.scenario, Command::Allocate {})?,
        Cmd::Check { scenario, axioms } => {
            let (p, c) = pick(
                &scenario.scenario,
                Command::Check {
                    axioms: Axiom::GRID.to_vec(),
                },
            )?;
            match axioms {
                Some(a) => (p, Some(Command::Check { axioms: a.clone() })),
                None => (p, c),
            }
        }
        Cmd::OptionBox(s) => {
            let stored = Scenario::load(&s.scenario)?.command;
            match stored {
                Some(c @ Command::OptionBox { .. }) => (s.scenario.clone(), Some(c)),
                _ => {
                    return Err(CliError::Invalid(
                        "option-box needs a scenario command with agent and others".into(),
                    ))
                }
            }
        }
        Cmd::Dominate(s) => pick(
            &s.scenario,
            Command::Dominate {
                conditioning_sample: None,
            },
        )?,
        Cmd::Pusp(s) => pick(&s.scenario, Command::Pusp { budget: None })?,
        Cmd::Uniqueness { scenario, non_bossy } => (
            scenario.scenario.clone(),
            Some(Command::Uniqueness {
                non_bossy: *non_bossy,
            }),
        ),
    };
    let format = Scenario::load(&path)?.format;
    Ok((run_scenario(&path, cmd, opts)?, format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        workers: cli.workers.max(1),
        grid_points: cli.grid_points,
        timings: cli.timings,
    };
    let outcome = execute(&cli, &opts).and_then(|(report, file_format)| {
        let format = cli.format.or(file_format).unwrap_or(Format::Json);
        emit_report(&report, format, cli.out.as_deref())?;
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            for check in report.golden_failures() {
                eprintln!("golden mismatch: {check}");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
