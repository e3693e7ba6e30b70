use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix dimension {dim} exceeds the supported maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian: |m(i,j) - conj m(j,i)| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("parameter `{name}` = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("chained game needs at least 2 settings, got {0}")]
    TooFewSettings(usize),
    #[error("expected {expected} angles for party {party}, got {found}")]
    AngleCount {
        party: char,
        expected: usize,
        found: usize,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("node {node} out of range for a graph with {n_nodes} nodes")]
    NodeOutOfRange { node: usize, n_nodes: usize },
    #[error("inconsistent game bounds: {0}")]
    InvalidBounds(String),
    #[error("critical visibility needs B_N = 0, got {0}")]
    NonzeroNoiseScore(f64),
    #[error("empty search range")]
    EmptyRange,
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unsupported oracle instance: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
