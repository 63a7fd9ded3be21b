use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("n = {n} exceeds the supported maximum {max}")]
    TooLarge { n: usize, max: usize },

    #[error("partitions live on different ground sets ({left} vs {right})")]
    GroundSetMismatch { left: usize, right: usize },

    #[error("partitions are not comparable in the refinement order")]
    NotComparable,

    #[error("degree {needed} exceeds truncation {available}")]
    TruncationExceeded { needed: usize, available: usize },

    #[error("could not build an intertwining isometry after {attempts} attempts")]
    SeedExhausted { attempts: usize },

    #[error("value leaves the image of B (residual {residual:e})")]
    NotBValued { residual: f64 },

    #[error("algebra pairs or truncations do not match: {0}")]
    PairMismatch(String),

    #[error("Gram matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    GramNotPsd { min_eig: f64 },

    #[error("moment of degree {needed} requested from a model of depth {depth}")]
    DepthExceeded { needed: usize, depth: usize },

    #[error("order {order} exceeds truncation {truncation}")]
    OrderExceedsTruncation { order: usize, truncation: usize },

    #[error("positivity certificate failed (min eigenvalue {min_eig:e})")]
    CertificateFailed { min_eig: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
