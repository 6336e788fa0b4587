use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix: pivot {pivot:e} in column {column}")]
    Singular { column: usize, pivot: f64 },
    #[error("QR iteration did not converge after {iterations} iterations ({found} of {dim} eigenvalues found)")]
    NoConvergence {
        iterations: usize,
        dim: usize,
        found: usize,
        /// Eigenvalues (re, im) isolated before the budget ran out.
        partial: Vec<(f64, f64)>,
    },
    #[error("control {value} outside [{lower}, {upper}] on axis {axis}")]
    ControlRange {
        axis: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("zero vector has no projective direction")]
    ZeroVector,
    #[error("point at infinity: last coordinate {last:e} not above {delta:e}")]
    AtInfinity { last: f64, delta: f64 },
    #[error("system is not split")]
    NotSplit,
    #[error(
        "matrix is not hyperbolic: eigenvalue real part {real_part:e} within tolerance of zero"
    )]
    Nonhyperbolic { real_part: f64 },
    #[error("component has no cycle")]
    NoCycle,
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("cache: {0}")]
    Cache(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
