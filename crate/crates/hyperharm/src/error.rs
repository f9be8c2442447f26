use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("map has a pole at the evaluation point")]
    PoleAtPoint,
    #[error("operation undefined for the identity map")]
    IdentityMap,
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("point too close to the boundary: {0}")]
    TooCloseToBoundary(String),
    #[error("adaptive quadrature did not converge on [{a}, {b}] (error estimate {err:e})")]
    QuadratureFailure { a: f64, b: f64, err: f64 },
    #[error("integration segment leaves the domain of the coefficient")]
    DomainViolation,
    #[error("derivative bounds D, K1, K2 are required")]
    BoundsMissing,
    #[error("circle field is not tangential (max normal component {0:e})")]
    NotTangential(f64),
    #[error("sample count {0} is not a power of two >= 64")]
    InvalidSampleCount(usize),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("inputs commute")]
    CommutingInputs,
    #[error("truncation needs {0} words, above the cap")]
    TruncationTooLarge(u64),
    #[error("invariance defect {0:e} above the admissible level")]
    InvarianceDefectTooLarge(f64),
    #[error("partition of unity has normalizing sum {0} below 0.5")]
    CoverageGap(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
