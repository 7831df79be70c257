use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside the supported domain: {0}")]
    Domain(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("parameter point is within {rel_tol:e} of the regime threshold {threshold}; perturb mu")]
    AmbiguousRegime { threshold: f64, rel_tol: f64 },
    #[error("roots too close for partial fractions (min distance {distance:e} <= {threshold:e})")]
    MergeTooClose { distance: f64, threshold: f64 },
    #[error("quadrature did not reach tolerance {tol:e} (estimated error {achieved:e})")]
    QuadratureNotConverged { tol: f64, achieved: f64 },
    #[error("finite-difference state blew up at t = {t}: |value| = {value:e}")]
    Instability { t: f64, value: f64 },
    #[error("imaginary residue {residue:e} exceeds tolerance for Phi = {value:e}")]
    ImaginaryResidue { residue: f64, value: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.into(),
        reason: reason.into(),
    }
}
