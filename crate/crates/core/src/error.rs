//! Error types.

use thiserror::Error;

/// Failures of the element kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElementError {
    #[error("degenerate tangent: |r'| = {norm:e} at xi = {xi}")]
    DegenerateTangent { xi: f64, norm: f64 },
    #[error("non-finite nodal value in element data")]
    NonFinite,
    #[error("moment load is not perpendicular to the tangent (relative component {ratio:e})")]
    NonPerpendicularMoment { ratio: f64 },
    #[error("element length must be positive, got {0}")]
    NonPositiveLength(f64),
}

/// Failures of the closest-point projections.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("projection did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular projection jacobian (|det| = {det:e})")]
    SingularJacobian { det: f64 },
    #[error("curvature ratio {0} outside [0, 1)")]
    CurvatureRatioOutOfRange(f64),
}

/// Failures of the linear and nonlinear solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("singular matrix at pivot {pivot}")]
    SingularMatrix { pivot: usize },
    #[error("ill-conditioned system (pivot ratio estimate {estimate:e})")]
    IllConditioned { estimate: f64 },
    #[error("non-finite values in solution")]
    NonFinite,
    #[error("Newton did not converge in {iterations} iterations (|R| = {residual:e}, |dD| = {increment:e})")]
    NoConvergence { iterations: usize, residual: f64, increment: f64 },
    #[error("load step {step} failed after {halvings} step halvings: {reason}")]
    StepFailed { step: usize, halvings: usize, reason: String },
    #[error(transparent)]
    Element(#[from] ElementError),
}

/// Invalid scenario or model configuration.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration at `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}
