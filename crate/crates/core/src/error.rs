use thiserror::Error;

/// Errors raised by the geometry, diagram, and graph layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("degenerate turning angle at vertex {vertex} ({angle} rad)")]
    DegenerateAngle { vertex: usize, angle: f64 },

    #[error("no doubly-critical chord between nonadjacent edges")]
    NoCriticalChord,

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("projection is not regular: {0:?}")]
    NotRegular(crate::projection::Failure),

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("invalid move site: {0}")]
    InvalidSite(String),

    #[error("ball exceeded vertex budget of {0}")]
    BudgetExceeded(usize),

    #[error("degenerate interpolant at t = {0}")]
    Degenerate(f64),

    #[error("degenerate event near t = {t}: {reason}")]
    DegenerateEvent { t: f64, reason: String },

    #[error("inconsistent event: {0}")]
    InconsistentEvent(String),

    #[error("level {0} is not in the sampled grid")]
    LevelNotSampled(f64),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable kind, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidPolygon(_) => "InvalidPolygon",
            Error::DegenerateAngle { .. } => "DegenerateAngle",
            Error::NoCriticalChord => "NoCriticalChord",
            Error::InvalidDirection(_) => "InvalidDirection",
            Error::NotRegular(_) => "NotRegular",
            Error::InvalidDiagram(_) => "InvalidDiagram",
            Error::InvalidSite(_) => "InvalidSite",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::Degenerate(_) => "Degenerate",
            Error::DegenerateEvent { .. } => "DegenerateEvent",
            Error::InconsistentEvent(_) => "InconsistentEvent",
            Error::LevelNotSampled(_) => "LevelNotSampled",
            Error::InvalidPattern(_) => "InvalidPattern",
            Error::Format(_) => "Format",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
