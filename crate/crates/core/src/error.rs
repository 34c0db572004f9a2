use thiserror::Error;

use crate::vertex::VertexId;

/// A line-numbered parse failure. Line 0 means "not tied to a line".
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = line;
        self
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ArenaError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("blocking vertex `{0}` has no outgoing edge")]
    Blocking(VertexId),
    #[error("edge from `{from}` points to undeclared vertex `{to}`")]
    Dangling { from: VertexId, to: VertexId },
    #[error("explicit arena exceeds the vertex cap of {0}")]
    TooLarge(usize),
    #[error("no start vertex")]
    NoStart,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("horizon {horizon} exceeded at step {step} in vertex `{vertex}`")]
    HorizonExceeded {
        vertex: VertexId,
        step: u64,
        horizon: u64,
    },
    #[error("no move defined for vertex `{0}`")]
    NoMove(VertexId),
    #[error("move for `{vertex}` does not leave that vertex")]
    ForeignEdge { vertex: VertexId },
    #[error("vertex `{0}` is not owned by the strategy's player")]
    WrongOwner(VertexId),
    #[error("vertex `{0}` missing from the step-count map")]
    MissingStepCount(VertexId),
    #[error("strategy `{0}` is not of the required kind: {1}")]
    WrongKind(String, String),
    #[error(transparent)]
    Arena(#[from] ArenaError),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ObjectiveError {
    #[error("mean payoff of the empty word is undefined")]
    EmptyMeanPayoff,
    #[error("prefix comparison needs equal lengths, got {0} and {1}")]
    UnequalLengths(usize, usize),
    #[error("mean-payoff objectives need a finite threshold")]
    InfiniteMeanThreshold,
    #[error("lasso cycle must be non-empty")]
    EmptyCycle,
}

/// Umbrella error for the higher-level algorithms.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GameError {
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("node cap of {0} exceeded")]
    NodeCap(usize),
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;
