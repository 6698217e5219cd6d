use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sample count mismatch: {left} vs {right}")]
    SampleCountMismatch { left: usize, right: usize },
    #[error("singular sample (condition number {condition:e})")]
    Singular { condition: f64 },
    #[error("winding quadrature {raw} is {distance:e} away from an integer (tolerance {tolerance:e})")]
    IntegralityViolation { raw: f64, distance: f64, tolerance: f64 },
    #[error("gauge transform is not based: |gamma(0) - I| = {defect:e}")]
    NonBasedGauge { defect: f64 },
    #[error("forms live on different meshes")]
    MeshMismatch,
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("invalid axis {axis} for a mesh of dimension {dim}")]
    InvalidAxis { axis: usize, dim: usize },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("mesh has no circle factor to serve as the loop axis")]
    MissingThetaFactor,
    #[error("holonomy Richardson error estimate {estimate:e} exceeds {limit:e}; increase the step count")]
    StepCountTooLow { estimate: f64, limit: f64 },
    #[error("expected {expected} arguments, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
