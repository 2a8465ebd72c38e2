use thiserror::Error;

use crate::charalg::Characteristic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("block sizes {sizes:?} do not sum to genus {genus}")]
    BlockSizeMismatch { genus: usize, sizes: Vec<usize> },

    #[error("genus mismatch: expected {expected}, got {actual}")]
    GenusMismatch { expected: usize, actual: usize },

    #[error("invalid characteristic: {0}")]
    InvalidCharacteristic(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("not in Siegel space: {invariant}")]
    NotInSiegelSpace { invariant: String },

    #[error("period matrix is degenerate: smallest eigenvalue of the imaginary part is {lambda_min:e}")]
    Degenerate { lambda_min: f64 },

    #[error("C*Omega + D is numerically singular (|det| = {det_abs:e})")]
    SingularDenominator { det_abs: f64 },

    #[error("matrix is not symplectic")]
    NotSymplectic,

    #[error("integer overflow while multiplying symplectic matrices")]
    Overflow,

    #[error("truncation failure: best bound {best_bound:e} at radius {radius} exceeds tolerance {tol:e}")]
    Truncation { best_bound: f64, radius: f64, tol: f64 },

    #[error("finite-difference step leaves Siegel space")]
    StepOutOfDomain,

    #[error("unsupported grouping: {0}")]
    UnsupportedGrouping(String),

    #[error("classification uncertain for {}", fmt_chars(.0))]
    Indeterminate(Vec<Characteristic>),

    #[error("characteristic {0} does not vanish at this point")]
    NotVanishing(Characteristic),

    #[error("denominator below margin at z-sample {index}; resample")]
    ResampleNeeded { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema violation in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_chars(chars: &[Characteristic]) -> String {
    chars.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
