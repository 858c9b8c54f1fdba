use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {len} agents")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("self-loop on agent {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({i}, {j}) has nonpositive or non-finite weight {weight}")]
    NonpositiveWeight { i: usize, j: usize, weight: f64 },

    #[error("network is disconnected")]
    DisconnectedGraph,

    #[error("invalid network dimensions: n = {n}, p = {p}")]
    InvalidDimensions { n: usize, p: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input")]
    NonFiniteInput,

    #[error("resolvent solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverDidNotConverge { iterations: usize, residual: f64 },

    #[error("missing model of neighbor {neighbor} for agent {agent}")]
    MissingNeighborModel { agent: usize, neighbor: usize },

    #[error("agent {neighbor} is not a neighbor of agent {agent}")]
    UnexpectedNeighborModel { agent: usize, neighbor: usize },

    #[error("({0}, {1}) is not an edge of the network")]
    UnknownEdge(usize, usize),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("loss of agent {0} is not quadratic")]
    NotQuadratic(usize),

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("synchronous Jacobi did not reach tolerance within {0} sweeps")]
    MaxSweepsExceeded(usize),

    #[error("ADMM penalty must be positive, got {0}")]
    NonpositiveRho(f64),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("precision matrix factorization failed")]
    FactorizationFailure,

    #[error("solution component of agent {0} has zero norm")]
    ZeroNormSolutionComponent(usize),

    #[error("unsupported initialization: {0}")]
    UnsupportedInit(&'static str),

    #[error("invalid loss parameters: {0}")]
    InvalidLoss(String),

    #[error("trial {trial} failed: {source}")]
    TrialFailed {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
