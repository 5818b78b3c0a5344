use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which extreme set a kernel computation was working on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Low => f.write_str("low"),
            Side::High => f.write_str("high"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("safe kernel is empty ({points} points, F = {faults}): {detail}")]
    KernelEmpty {
        points: usize,
        faults: usize,
        detail: String,
    },

    #[error("kernel computation failed on dimension {dim} ({side} side): {source}")]
    KernelAt {
        dim: usize,
        side: Side,
        #[source]
        source: Box<Error>,
    },

    #[error("round {round}, agent {agent}: {source}")]
    Runtime {
        round: usize,
        agent: NodeId,
        #[source]
        source: Box<Error>,
    },

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("matrix is not row-stochastic: {0}")]
    NotRowStochastic(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("step schedule rejected: {0}")]
    StepSchedule(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("scenario failed validation:\n{0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures raised while the simulation was running (as opposed to
    /// configuration or I/O problems).
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::KernelEmpty { .. } | Error::KernelAt { .. } | Error::Runtime { .. } | Error::Solver(_)
        )
    }
}
