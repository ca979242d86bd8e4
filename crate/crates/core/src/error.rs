use thiserror::Error;

use crate::model::{Identifier, Time};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("identifier must not be empty")]
    EmptyIdentifier,
    #[error("identifier {0:?} contains whitespace")]
    WhitespaceInIdentifier(String),
    #[error("interval start {start} exceeds end {end}")]
    InvertedInterval { start: Time, end: Time },
}

/// A syntax error in rule or program text, with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

impl TraceError {
    pub(crate) fn at(line: usize, message: impl Into<String>) -> Self {
        TraceError::Malformed { line, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("exclusive rules {exclusive_rules:?} appear in a specification with a cycle through rules {cycle:?}")]
    ExclusiveInCycle { exclusive_rules: Vec<usize>, cycle: Vec<usize> },
    #[error("rule {rule} assigns map key {key} more than once")]
    DuplicateAssignment { rule: usize, key: Identifier },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("the specification is cyclic and uses unbounded data; evaluation may not terminate, so a fuel limit is required")]
    FuelRequired,
    #[error("modulus must be at least 1")]
    ZeroBound,
    #[error("interval {0} is not in the result pool")]
    NotInPool(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("program has no lines")]
    EmptyProgram,
    #[error("line {line}: only the last line may be stop, and it must be")]
    MisplacedStop { line: usize },
    #[error("line {line}: goto target {target} out of range")]
    GotoOutOfRange { line: usize, target: usize },
    #[error("line {line}: counter {counter} out of range (expected 0 or 1)")]
    BadCounter { line: usize, counter: usize },
    #[error("formula needs at least one variable")]
    NoVariables,
    #[error("quantifier {position} binds {found}, expected the prime {expected}")]
    UnexpectedPrime { position: usize, expected: u64, found: u64 },
    #[error("clause {clause} mentions unquantified variable x{var}")]
    UnboundVariable { clause: usize, var: u64 },
    #[error("clause {clause} has {found} literals, expected 3")]
    ClauseWidth { clause: usize, found: usize },
    #[error("formula with {0} variables is too large to enumerate")]
    TooLarge(usize),
}

/// Top-level error for callers that drive the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
