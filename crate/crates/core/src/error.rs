use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("representation mismatch: expected {expected}, found {found}")]
    RepresentationMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("point {point} lies outside the admissible interval ({lo}, {hi})")]
    OutOfDomain { point: f64, lo: f64, hi: f64 },

    #[error("invalid localization profile: {0}")]
    InvalidProfile(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("energy {energy} at or near point spectrum (|D| = {det_abs:.3e})")]
    NearPointSpectrum { energy: f64, det_abs: f64 },

    #[error("state not in the admissible domain: {0}")]
    NotInDomain(String),

    #[error("increase horizon: {0}")]
    Horizon(String),

    #[error("extrapolation fit failed: {0}")]
    Fit(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

pub type Result<T> = std::result::Result<T, Error>;
