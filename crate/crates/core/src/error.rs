use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("value must be nonnegative: {0}")]
    Negative(String),

    #[error("invalid exponent pair: {0}")]
    InvalidExponents(String),

    #[error("invalid rational point ({p}/{q}, {r}/{q}): {reason}")]
    InvalidPoint {
        p: String,
        r: String,
        q: String,
        reason: &'static str,
    },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid construction parameters: {0}")]
    InvalidParams(String),

    #[error("operation requires strict parameters: {0}")]
    ModeError(String),

    #[error("enumeration budget exceeded: needed at least {needed}, budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("root vertex does not survive")]
    RootDead,

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("dead end at round {round}: no admissible child in color block {color} ({survivors} survivors)")]
    DeadEnd {
        round: u32,
        color: u32,
        survivors: u32,
    },

    #[error("claim violated: {0}")]
    Violation(String),

    #[error("coefficient bound {given} is below the sufficient bound {required}")]
    InsufficientBound { given: u64, required: u64 },
}
