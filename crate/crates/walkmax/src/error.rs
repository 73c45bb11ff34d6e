//! Error type shared by every module.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("log argument {arg} lies on the branch cut (-inf, 0]")]
    BranchCut { arg: Complex64 },
    #[error("tolerance {tol} must be positive and below the Hardy estimate {hardy}")]
    InvalidTolerance { tol: f64, hardy: f64 },
    #[error("order n = {n} must exceed the growth exponent {a}")]
    InvalidOrder { n: usize, a: f64 },
    #[error("cone half-angle {gamma} is too small for a sinh deformation")]
    GammaTooSmall { gamma: f64 },
    #[error("no strip with positive margin found for |q| <= {q_max}")]
    StripNotFound { q_max: f64 },
    #[error("deformation invalid at q = {q}, eta = {eta} (distance {distance:e} to the cut)")]
    DeformationInvalid { q: Complex64, eta: Complex64, distance: f64 },
    #[error("non-finite exponent while computing a Wiener-Hopf factor at q = {q}")]
    NonFiniteExponent { q: Complex64 },
    #[error("division by a vanishing factor value")]
    DivisionByZero,
    #[error("strip violation: {0}")]
    StripViolation(String),
    #[error("tail mass {mass:e} exceeds the allowed truncation loss")]
    TailMass { mass: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("maturity {maturity} is not an integer multiple of the monitoring interval {dt}")]
    NonIntegralSteps { maturity: f64, dt: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the deformation or strip preconditions, as
    /// opposed to inputs that are malformed or numerics that broke down.
    pub fn is_certification(&self) -> bool {
        matches!(
            self,
            Error::DeformationInvalid { .. }
                | Error::StripViolation(_)
                | Error::StripNotFound { .. }
                | Error::GammaTooSmall { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
