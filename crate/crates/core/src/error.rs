use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("qubit amplitudes are not normalized: |alpha|^2 + |beta|^2 = {norm_sqr}")]
    UnnormalizedQubit { norm_sqr: f64 },

    #[error("unknown qubit `{0}` in register")]
    UnknownQubit(String),

    #[error("invalid label `{0}`")]
    InvalidLabel(String),

    #[error("no conditional operator for sub-label `{0}`")]
    MissingConditionalOp(String),

    #[error("outcome {outcome} is impossible (probability {probability:.3e})")]
    ImpossibleOutcome { outcome: String, probability: f64 },

    #[error("non-negligible weight outside retained labels: {0:?}")]
    UnexpectedSupport(Vec<String>),

    #[error("state has the wrong structure: {0}")]
    InvalidStructure(String),

    #[error("environment dimension {dim} exceeds the limit of {limit}")]
    EnvironmentTooLarge { dim: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
