use thiserror::Error;

use crate::morse::IndexReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is singular to working tolerance")]
    Singular,

    #[error("subspace is outside the chart domain: {0}")]
    ChartDomain(String),

    #[error("parameter {t} outside the profile domain [{a}, {b}]")]
    Domain { t: f64, a: f64, b: f64 },

    #[error("numerical failure at {at}: {reason}")]
    NumericalFailure { at: f64, reason: String },

    #[error("path endpoint u = {u} meets the reference Lagrangian (dimension {dim})")]
    EndpointDegenerate { u: f64, dim: usize },

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("invalid rectangle: {0}")]
    InvalidSpec(String),

    #[error("index counts disagree (conjugate {}, spectral {}, hessian {}, residual {})",
        .0.conjugate_total, .0.spectral_total, .0.hessian_index, .0.rectangle_residual)]
    CertificationFailure(Box<IndexReport>),
}

impl Error {
    pub(crate) fn numerical(at: f64, reason: impl Into<String>) -> Self {
        Error::NumericalFailure {
            at,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
