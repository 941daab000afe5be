use thiserror::Error;

/// Errors raised by the geometry, partition and integration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} outside the supported range 1..=64")]
    InvalidDimension(usize),

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("polytope needs at least one vertex")]
    EmptyVertexList,

    #[error("support vectors were sampled on different direction grids")]
    GridMismatch,

    #[error("invalid gauge: {0}")]
    InvalidGauge(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("bisection depth {depth} exceeded on [{a}, {b}]")]
    DepthExceeded { depth: u32, a: f64, b: f64 },

    #[error("partition would exceed {limit} intervals")]
    TooManyIntervals { limit: usize },

    #[error("point {0} outside [0, 1]")]
    OutOfDomain(f64),

    #[error("invalid step function: {0}")]
    InvalidStep(String),

    #[error("no primitive value on [{a}, {b}]")]
    MissingPrimitive { a: f64, b: f64 },

    #[error("vertex enumeration limited to 20 vectors, got {0}")]
    TooManyVectors(usize),

    #[error("partition mesh {mesh} is not below 1/{n}")]
    MeshTooCoarse { mesh: f64, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
