use thiserror::Error;

/// Errors raised while building or running the coupled solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FsiError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("{name} must be {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    /// Zero or numerically negligible pivot during factorization. `row` is the
    /// index in the caller's (unpermuted) numbering.
    #[error("singular matrix: pivot {pivot} (row {row}) has magnitude {magnitude:e}")]
    SingularMatrix {
        pivot: usize,
        row: usize,
        magnitude: f64,
    },

    #[error("initial pressure is required to build the initial interface traction")]
    MissingInitialPressure,

    #[error("incompatible time grids: {0}")]
    IncompatibleGrids(String),
}

pub type Result<T> = std::result::Result<T, FsiError>;
