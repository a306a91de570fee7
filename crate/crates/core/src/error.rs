use thiserror::Error;

/// Errors produced by the codec, metrics and harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("malformed RLE: {0}")]
    MalformedRle(String),

    #[error("boundary point set is empty")]
    EmptyBoundary,

    #[error("no pixel lies inside the sampling band (delta = {delta})")]
    EmptyBand { delta: f64 },

    #[error("invalid point count: {0}")]
    InvalidCount(String),

    #[error("cannot draw {requested} distinct points from a grid of {available} pixels")]
    InfeasibleCount { requested: usize, available: usize },

    #[error("point ({x}, {y}) lies outside the {width}x{height} grid")]
    OutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("cardinality mismatch: {0}")]
    Cardinality(String),

    #[error("degenerate input for triangulation: {0}")]
    DegenerateInput(String),

    #[error("need at least 3 foreground points, got {0}")]
    InsufficientPoints(usize),

    #[error("point layout is not the expected lattice: {0}")]
    Layout(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
