use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("degenerate triangle {0} (area {1:e})")]
    DegenerateTriangle(usize, f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),
    #[error("problem too large for the dense oracle: n = {n} > {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("spectral parameter {lambda} outside (0, {mu1})")]
    OutsideDomain { lambda: f64, mu1: f64 },
    #[error("root not bracketed for gamma = {0}")]
    NotBracketed(f64),
    #[error("vertical mode cutoff j_max = {j_max} too small: last merged value {last} exceeds lowest value {lowest} of mode j_max")]
    InsufficientModes { j_max: usize, last: f64, lowest: f64 },
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Geometry(_) => "geometry",
            Error::Mesh(_) => "mesh",
            Error::DegenerateTriangle(..) => "degenerate_triangle",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::NotConverged(_) => "not_converged",
            Error::TooLarge { .. } => "too_large",
            Error::OutsideDomain { .. } => "outside_domain",
            Error::NotBracketed(_) => "not_bracketed",
            Error::InsufficientModes { .. } => "insufficient_modes",
            Error::Config { .. } => "config",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
