use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative cost {value} at {location}")]
    NegativeCost { location: String, value: f64 },
    #[error("instance needs at least one facility and one client (got m={m}, n={n})")]
    EmptyDimension { m: usize, n: usize },
    #[error("non-finite cost at {location}")]
    NonFiniteEntry { location: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("open facility set is empty")]
    EmptyOpenSet,
    #[error("facility index {index} out of range (m={m})")]
    FacilityOutOfRange { index: usize, m: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("infeasible input: {0}")]
    InfeasibleInput(String),
    #[error("gamma {0} outside the open interval (1, 2)")]
    GammaOutOfRange(f64),
    #[error("delta {0} must be at least 1")]
    DeltaOutOfRange(f64),
    #[error("clients {0} and {1} are not neighbors in the sparsened support graph")]
    NotNeighbors(usize, usize),
    #[error("{what} of size {size} exceeds the limit {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("truncated file: expected {expected} tokens, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("malformed token {token:?} at position {position}")]
    MalformedToken { position: usize, token: String },
    #[error("json: {0}")]
    Json(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalFailure(_) | Error::InfeasibleInput(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
