use thiserror::Error;

/// Errors shared by the numerical modules.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular or too ill-conditioned: {0}")]
    SingularMatrix(String),

    #[error("required moment-map factor is singular: {0}")]
    SingularFactor(String),

    #[error("matrix is not of numerical rank one (rank {0})")]
    NotRankOne(usize),

    #[error("point violates the regularity conditions of the chart: {0}")]
    RegularityViolation(String),

    #[error("spectrum is numerically degenerate (gap {gap:.3e}, spread {spread:.3e})")]
    DegenerateSpectrum { gap: f64, spread: f64 },

    #[error("extracted coordinates do not reproduce the chart form (residual {0:.3e})")]
    ChartMismatch(f64),

    #[error("flow degree {k} must be a multiple of the cycle length {m}")]
    BadMultiple { k: usize, m: usize },

    #[error("series evaluation did not converge within {0} terms")]
    NonConvergence(usize),

    #[error("invalid operator parameters: {0}")]
    BadParameters(String),

    #[error("evaluation point is too close to a coefficient pole (|factor| = {0:.3e})")]
    PoleProximity(f64),

    #[error("finite differences are inconsistent with a holomorphic function (gap {0:.3e})")]
    NonHolomorphic(f64),

    #[error("numerical overflow in matrix function evaluation")]
    Overflow,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
