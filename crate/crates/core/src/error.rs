use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate form: Gram determinant is zero")]
    DegenerateForm,
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("lattice is not integral: entry ({0},{1}) of the Gram matrix is not an integer")]
    NotIntegral(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate span: Gram matrix of the given vectors is singular")]
    DegenerateSpan,
    #[error("invalid wall set: {0}")]
    InvalidWalls(String),
    #[error("cone is not non-negative (witness ray {0:?})")]
    ConeNotNonNegative(Vec<f64>),
    #[error("certificate unavailable: {0}")]
    CertificateUnavailable(String),
    #[error("span is not negative definite")]
    SpanNotNegativeDefinite,
    #[error("span is not negative semidefinite")]
    SpanNotNegativeSemidefinite,
    #[error("unsupported dimension: |E| = {0} exceeds 4")]
    UnsupportedDimension(usize),
    #[error("quadrature tolerance not met (estimated error {0:e})")]
    ToleranceNotMet(f64),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("point too close to a wall for the finite-difference stencil")]
    TooCloseToWall,
    #[error("family is not negative at t = {0}")]
    FamilyNotNegative(f64),
    #[error("isotropic edge {0:?} is not rational")]
    NonRationalEdge(Vec<usize>),
    #[error("point lies on the singular set (edge {edge:?}, generator {generator:?})")]
    OnSingularSet { edge: Vec<usize>, generator: Vec<String> },
    #[error("truncation did not converge up to radius {radius} (last change {change:e})")]
    TruncationNotConverged { radius: usize, change: f64 },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("a theta term falls outside double-precision range")]
    NonFinite,
    #[error("parse error at {path}: {msg}")]
    Parse { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
