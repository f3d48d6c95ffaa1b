use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {0} out of range (vertex count {1})")]
    VertexOutOfRange(VertexId, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("blocked mask has {got} cells, expected {expected}")]
    MaskSize { expected: usize, got: usize },
}

/// Text-format parse failure; `line` is 1-based, 0 when the error is not tied
/// to a single line.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
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
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("horizon {horizon} exceeds the configured bound {bound}")]
    HorizonTooLarge { horizon: usize, bound: usize },
    #[error("constraint references non-existent edge {0}-{1}")]
    UnknownEdge(VertexId, VertexId),
    #[error("constraint references vertex {0} outside the graph")]
    UnknownVertex(VertexId),
    #[error("constraint belongs to team {found}, network is for team {expected}")]
    ForeignConstraint { expected: usize, found: usize },
    #[error("infeasible at this horizon: flow value {value}, team size {needed}")]
    InfeasibleAtHorizon { value: usize, needed: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("joint state space too large: {states} > limit {limit}")]
    StateSpaceTooLarge { states: u128, limit: u128 },
    #[error("oracle does not support relaxed team flags")]
    UnsupportedFlags,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("generator spec unsatisfiable: {0}")]
    Unsatisfiable(String),
    #[error("no usable instance after {0} resamples")]
    ResampleLimit(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Cooperative deadline expired inside a flow solve or search.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("time limit reached")]
pub struct TimedOut;
