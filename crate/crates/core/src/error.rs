use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("endowment of commodity {commodity} is negative ({value})")]
    InvalidEndowment { commodity: usize, value: String },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid preference: {0}")]
    InvalidPreference(String),

    /// The bundle that was supposed to lose is between the peak and the
    /// bundle that was supposed to win, so no single-peaked witness exists.
    #[error("the worse bundle lies between the peak and the better bundle")]
    BetweennessHolds,

    #[error("peak of agent {agent} in commodity {commodity} is {value}, outside [0, {bound}]")]
    InvalidPeak {
        agent: usize,
        commodity: usize,
        value: String,
        bound: String,
    },

    #[error("invalid reference allocation: {0}")]
    InvalidReference(String),

    #[error("invalid priority order: {0}")]
    InvalidOrder(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("check is defined for one commodity only, economy has {0}")]
    MultiCommodity(usize),

    #[error("rule `{0}` is not strategy-proof on the grid")]
    NotStrategyProof(String),

    #[error("rule `{rule}` lacks certified hypotheses: {failed:?}")]
    HypothesesNotCertified { rule: String, failed: Vec<String> },

    #[error("cannot parse rational `{0}`")]
    ParseRational(String),

    #[error("rational arithmetic overflowed")]
    Overflow,

    #[error("worker pool: {0}")]
    Pool(String),
}
