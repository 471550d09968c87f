use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("argument {0} outside the supported domain")]
    DomainError(f64),
    #[error("potential is not confining")]
    NonConfining,
    #[error("equilibrium measure is not one-cut (density negative near x = {0})")]
    MultiCut(f64),
    #[error("iteration did not converge: {0}")]
    NoConvergence(&'static str),
    #[error("search bounds exceeded while locating {0}")]
    SearchBoundsExceeded(&'static str),
    #[error("flat maximum: G''(x0) = {0}")]
    FlatMaximum(f64),
    #[error("contour integral is not real (imaginary part {0})")]
    NotReal(f64),
    #[error("contour passes too close to the pole")]
    PoleTooClose,
    #[error("node doubling changed the determinant by {0}")]
    Divergence(f64),
    #[error("operator is numerically singular")]
    SingularOperator,
    #[error("parameters are confluent (gap {0})")]
    ConfluentAlphas(f64),
    #[error("differentiation window too small")]
    WindowTooSmall,
    #[error("denominator determinant vanished")]
    SingularDenominator,
    #[error("weight underflows on the whole grid")]
    UnderflowRange,
    #[error("loss of orthogonality: Gram deviation {0}")]
    LossOfOrthogonality(f64),
    #[error("quadrature failed to converge")]
    QuadratureFailure,
    #[error("B matrix is ill-conditioned (condition {0:e})")]
    IllConditionedB(f64),
    #[error("theorem hypothesis violated: null expectation vanishes at dimension {0}")]
    HypothesisViolated(usize),
    #[error("Gamma matrix is singular")]
    SingularGammaMatrix,
    #[error("exponent m - 2k + 1 vanishes")]
    ZeroExponent,
    #[error("case out of range for the requested mixture")]
    CaseOutOfRange,
}

pub type Result<T> = core::result::Result<T, Error>;
