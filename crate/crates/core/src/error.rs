use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column {column} has norm {norm}, expected a unit vector")]
    NonUnitColumn { column: usize, norm: f64 },
    #[error("vectors are linearly dependent (Gram determinant {determinant:e})")]
    LinearlyDependent { determinant: f64 },
    #[error("overlap {mu} outside the open interval ({lower}, 1) for dimension {dimension}")]
    OverlapOutOfRange { dimension: usize, mu: f64, lower: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid matrix shape: {0}")]
    InvalidShape(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid coefficient matrix: {0}")]
    InvalidCoefficients(String),
    #[error("matrix is not an isometry (defect {defect:e})")]
    NotIsometry { defect: f64 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("invalid rank {rank} for dimension {dimension}")]
    InvalidRank { dimension: usize, rank: usize },
    #[error("Kraus operators are not trace preserving (completeness defect {defect:e})")]
    NotTracePreserving { defect: f64 },
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("invalid Kraus specification: {0}")]
    InvalidKrausSpec(String),
    #[error("operation requires dimension {expected}, basis has dimension {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("channel verification failed: {0}")]
    ChannelMismatch(String),
    #[error("basis matrix has non-negligible imaginary part")]
    ComplexBasis,
    #[error("Kraus coefficients have non-negligible imaginary part")]
    ComplexCoefficients,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("block-dephased operator has vanishing trace ({trace:e})")]
    ZeroTrace { trace: f64 },
    #[error("block size mismatch: {0}")]
    BlockSizeMismatch(String),
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
    #[error("unknown channel family `{0}`")]
    UnknownChannelFamily(String),
    #[error("unknown oracle `{0}`")]
    UnknownOracle(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for numerical failures (as opposed to invalid inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence(_) | Error::ChannelMismatch(_) | Error::Internal(_))
    }
}
