use thiserror::Error;

use crate::pipeline::StageDiagnostics;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate hull: {count} points are fewer than 3 or collinear")]
    DegenerateHull { count: usize },

    #[error("degenerate support: {count} contacts do not span an area")]
    DegenerateSupport { count: usize },

    #[error("empty geometry: {0}")]
    EmptyGeometry(&'static str),

    #[error("insufficient points: got {got}, need at least {need}")]
    InsufficientPoints { got: usize, need: usize },

    #[error("ellipsoid fit has a non-positive semi-axis {0:?}")]
    DegenerateEllipsoid([f64; 3]),

    #[error("point cloud has no normals")]
    MissingNormals,

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no feasible grasp-place pair ({0})")]
    NoFeasiblePair(Box<StageDiagnostics>),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::InvalidGeometry(msg.into())
    }

    /// Stable machine-readable kind, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateHull { .. } => "DegenerateHull",
            Error::DegenerateSupport { .. } => "DegenerateSupport",
            Error::EmptyGeometry(_) => "EmptyGeometry",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::DegenerateEllipsoid(_) => "DegenerateEllipsoid",
            Error::MissingNormals => "MissingNormals",
            Error::Shape { .. } => "ShapeError",
            Error::InvalidGeometry(_) => "InvalidGeometry",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NoFeasiblePair(_) => "NoFeasiblePair",
        }
    }
}
