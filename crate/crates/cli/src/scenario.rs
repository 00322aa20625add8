//! Scenario files: an economy, rules, peaks, a grid and one command.

use std::path::Path;

use serde::{Deserialize, Serialize};

use peakshare_core::{make_grid, Axiom, Bundle, Economy, PeakGrid, PeakProfile, Rational, RuleSpec};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub economy: Option<Economy>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<RuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peaks: Option<PeakProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    Points { points: usize },
    Steps { steps: Vec<Rational> },
    Values { values: Vec<Vec<Rational>> },
}

pub const DEFAULT_GRID_POINTS: usize = 5;

impl GridSpec {
    pub fn build(&self, econ: &Economy) -> Result<PeakGrid, CliError> {
        Ok(match self {
            GridSpec::Points { points } => make_grid(econ, *points)?,
            GridSpec::Steps { steps } => PeakGrid::with_steps(econ, steps)?,
            GridSpec::Values { values } => PeakGrid::from_values(econ, values.clone())?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Table,
}

fn grid_axioms() -> Vec<Axiom> {
    Axiom::GRID.to_vec()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    Allocate {},
    Check {
        #[serde(default = "grid_axioms")]
        axioms: Vec<Axiom>,
    },
    OptionBox {
        /// 1-based.
        agent: usize,
        others: Vec<Bundle>,
    },
    Dominate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        conditioning_sample: Option<usize>,
    },
    Pusp {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<usize>,
    },
    #[serde(alias = "theorem3")]
    Uniqueness {
        #[serde(default)]
        non_bossy: bool,
    },
    Builtin {
        case: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Allocate {} => "allocate",
            Command::Check { .. } => "check",
            Command::OptionBox { .. } => "option-box",
            Command::Dominate { .. } => "dominate",
            Command::Pusp { .. } => "pusp",
            Command::Uniqueness { .. } => "uniqueness",
            Command::Builtin { .. } => "builtin",
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
            path: path.display().to_string(),
            source: e,
        })?;
        Scenario::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("scenario: {e}")))
    }

    pub fn economy(&self) -> Result<&Economy, CliError> {
        self.economy
            .as_ref()
            .ok_or_else(|| CliError::Invalid("scenario has no economy".into()))
    }

    /// The grid, with `points` overriding the file when given.
    pub fn grid(&self, points: Option<usize>) -> Result<PeakGrid, CliError> {
        let econ = self.economy()?;
        match (points, &self.grid) {
            (Some(k), _) => GridSpec::Points { points: k }.build(econ),
            (None, Some(spec)) => spec.build(econ),
            (None, None) => GridSpec::Points {
                points: DEFAULT_GRID_POINTS,
            }
            .build(econ),
        }
    }

    /// Validates every rule against the economy.
    pub fn check_rules(&self) -> Result<(), CliError> {
        let econ = self.economy()?;
        for rule in &self.rules {
            rule.validate(econ)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_commands_and_grids() {
        let s = Scenario::parse(
            r#"{
                "economy": {"omega": ["12", "15"], "agents": 3},
                "rules": [{"rule": "uniform"}],
                "peaks": [["2", "2"], ["4", "7"], ["8", "4"]],
                "grid": {"points": 3},
                "command": {"kind": "check"}
            }"#,
        )
        .unwrap();
        assert_eq!(s.command, Some(Command::Check { axioms: grid_axioms() }));
        assert_eq!(s.grid(None).unwrap().points_per_agent(), 9);
        assert_eq!(s.grid(Some(2)).unwrap().points_per_agent(), 4);

        let t = Scenario::parse(r#"{"command": {"kind": "theorem3"}}"#).unwrap();
        assert_eq!(t.command, Some(Command::Uniqueness { non_bossy: false }));

        let steps: GridSpec = serde_json::from_str(r#"{"steps": ["0.5"]}"#).unwrap();
        assert!(matches!(steps, GridSpec::Steps { .. }));
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(Scenario::parse(r#"{"economy": {"omega": [1], "agents": 1}, "colour": 3}"#).is_err());
        assert!(Scenario::parse(r#"{"command": {"kind": "allocate", "x": 1}}"#).is_err());
        assert!(Scenario::parse(r#"{"command": {"kind": "check", "axioms": ["efficiency"]}}"#).is_err());
        assert!(Scenario::parse("not json").is_err());
    }
}
