use thiserror::Error;

use crate::game::MinPolicy;
use crate::numeric::Rat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("singular linear system")]
    SingularMatrix,

    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("the gain is not constant: {}", fmt_vec(.0))]
    NonConstantGain(Vec<Rat>),

    #[error("enumeration of {count} policy pairs exceeds the cap of {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error(transparent)]
    PolicyIteration(#[from] PiError),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Failure modes of two-player policy iteration.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PiError {
    /// The Min policy sequence revisited a policy without terminating.
    /// `cycle` lists the policies from the first visit of `repeated` onward.
    #[error("policy iteration cycled (repeated policy {repeated:?})")]
    CycleDetected {
        repeated: MinPolicy,
        cycle: Vec<MinPolicy>,
    },

    #[error("reduced operator has non-constant gain {}", fmt_vec(.0))]
    NonConstantGain(Vec<Rat>),

    #[error("policy iteration exceeded {0} iterations")]
    IterationCap(usize),
}

fn fmt_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(Rat::to_string).collect();
    format!("({})", parts.join(", "))
}
