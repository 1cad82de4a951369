use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integrand is not integrable on (0, ∞): {0}")]
    NonIntegrable(String),
    #[error("function does not vanish at the origin")]
    SingularAtOrigin,
    #[error("function has a nonvanishing r⁻¹ coefficient at the origin")]
    PoleAtOrigin,
    #[error("function is outside the operator domain: {0}")]
    DomainViolation(String),
    #[error("spectral parameter hits a pole of the resolvent")]
    PoleHit,
    #[error("no bound state for this extension parameter")]
    NoBoundState,
    #[error("extension parameter κ must be nonzero")]
    ZeroKappa,
    #[error("determinant d(z) vanishes")]
    DeterminantZero,
    #[error("invalid harmonic indices l = {l}, m = {m}")]
    InvalidIndices { l: i32, m: i32 },
    #[error("field evaluated at the origin")]
    OriginEvaluation,
    #[error("function has a pole term; derivative moments are undefined")]
    NotSmoothEnough,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
