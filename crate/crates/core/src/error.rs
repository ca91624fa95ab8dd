use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not supported (need 1 <= n <= 64)")]
    InvalidDimension(u32),

    #[error("dimension {n} exceeds the dense vertex-set cap of {cap}")]
    DenseCapExceeded { n: u32, cap: u32 },

    #[error("coordinate index {index} out of range 1..={n}")]
    CoordinateOutOfRange { index: usize, n: u32 },

    #[error("vertex {bits:#x} does not belong to the {n}-cube")]
    VertexOutOfRange { bits: u64, n: u32 },

    #[error("vertex sets live in different cubes ({left} vs {right})")]
    GeometryMismatch { left: u32, right: u32 },

    #[error("radius {radius} out of range 0..={n}")]
    RadiusOutOfRange { radius: u32, n: u32 },

    #[error("degenerate coordinate layout for n={n}, k={k}: {reason}")]
    DegenerateLayout { n: usize, k: usize, reason: &'static str },

    #[error("invalid parameter {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("fixed-point iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: u64, residual: f64 },

    #[error("vertex {0:#x} is not occupied")]
    Unoccupied(u64),

    #[error("empty vertex set: {0}")]
    EmptySet(&'static str),

    #[error("stage-0 tree exploration failed to reach the target size")]
    StageZeroFailed,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }

    /// Whether the error comes from a size or memory cap rather than bad input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::DenseCapExceeded { .. } | Error::ResourceCap(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
