use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("metric is not positive definite at {point:?} (smallest eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { point: Vec<f64>, eigenvalue: f64 },
    #[error("metric is singular at {point:?} (condition number {condition:e})")]
    SingularMetric { point: Vec<f64>, condition: f64 },
    #[error("Jacobian is rank deficient at {point:?} (σ_min/σ_max = {ratio:e})")]
    RankDeficient { point: Vec<f64>, ratio: f64 },
    #[error("vector is not vertical (horizontal part has norm {0:e})")]
    NotVertical(f64),
    #[error("vector is not horizontal (vertical part has norm {0:e})")]
    NotHorizontal(f64),
    #[error("zero vector has no slant angle")]
    ZeroVector,
    #[error("slant angle {0} is too close to 0 or π/2 for an adapted frame")]
    DegenerateAngle(f64),
    #[error("inconsistent instance: {0}")]
    InstanceInconsistent(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("manifest error in `{field}`: {reason}")]
    Manifest { field: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn manifest(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Manifest { field: field.into(), reason: reason.into() }
    }
}
