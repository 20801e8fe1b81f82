use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate target: no strictly positive mass")]
    DegenerateTarget,

    #[error("empty point list")]
    EmptyPoints,

    #[error("unsupported dimension {0} (expected 1, 2 or 3)")]
    Dimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("point {index} is outside the unit cube or not finite")]
    OutsideDomain { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("total masses differ: {0} vs {1}")]
    MassMismatch(f64, f64),

    #[error("instance too large: {0} support points (limit {1})")]
    Oversize(usize, usize),

    #[error("test function violates the 1-Lipschitz condition between support points {0} and {1}")]
    LipschitzViolation(usize, usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("projection did not converge after {iterations} iterations (gap {gap:e}, residuals {residuals:?})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        residuals: Vec<f64>,
    },

    #[error("solver diverged: energy increased for {consecutive} consecutive iterations (last J = {energy})")]
    Diverged { consecutive: usize, energy: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),
}
