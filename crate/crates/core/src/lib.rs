//! Exact allocation of several divisible commodities among agents with
//! single-peaked preferences.
//!
//! Rules are evaluated in exact rational arithmetic. The [`axioms`] module
//! certifies or refutes incentive and fairness properties by exhaustive
//! search over peak grids, and [`dominance`] compares strategy-proof rules
//! through their option sets.

pub mod axioms;
pub mod dominance;
pub mod econ;
pub mod error;
pub mod grid;
pub mod rational;
pub mod rules;
pub mod waterfill;

pub use axioms::{Axiom, AxiomLab, AxiomReport, Verdict, Witness};
pub use econ::{make_economy, Allocation, Bundle, Economy, PeakProfile, QuadraticPreference};
pub use error::{Error, Result};
pub use grid::{make_grid, PeakGrid, ProfileSpace};
pub use rational::Rational;
pub use rules::{evaluate_rule, PeaksOnlyRule, RuleSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
