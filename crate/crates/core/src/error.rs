use thiserror::Error;

/// Errors for grid construction, estimation, and band building.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounds: left endpoint {a} must be below right endpoint {b}")]
    InvalidBounds { a: f64, b: f64 },

    #[error("invalid grid size {0}: need at least 2 points")]
    InvalidGridSize(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty sample")]
    EmptySample,

    #[error("sample length mismatch: {0} vs {1}")]
    SampleLengthMismatch(usize, usize),

    #[error("bandwidth must be positive, got {0}")]
    NonpositiveBandwidth(f64),

    #[error("regularization parameter must be positive, got {0}")]
    NonpositiveAlpha(f64),

    #[error("gamma must lie in (0, 1), got {0}")]
    InvalidGamma(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("degenerate residual matrix: band half-width would be zero")]
    DegenerateResiduals,

    #[error("covariance matrix is not positive semidefinite: min eigenvalue {0}")]
    NotPositiveSemidefinite(f64),

    #[error("need at least 100 simulation draws, got {0}")]
    TooFewDraws(usize),

    #[error("too few observations: {0}")]
    TooFewObservations(usize),

    #[error("covariance matrix of the data-generating process is not positive definite")]
    NonPsdCovariance,

    #[error("invalid noise density: {0}")]
    InvalidNoiseDensity(String),

    #[error("fit has no bandwidth: residual processes require a kernel-based fit")]
    MissingBandwidth,

    #[error("residual process {found:?} does not match requested process {requested:?}")]
    ProcessMismatch {
        requested: crate::inference::ProcessIndex,
        found: crate::inference::ProcessIndex,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
