//! Crate-wide error type.

use crate::geom::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("curve: {0}")]
    Curve(String),

    #[error("point ({}, {}) outside oracle domain", .0.x1, .0.x2)]
    OutsideDomain(Point),

    #[error("solver build: {0}")]
    SolverBuild(String),

    #[error("terminal ({}, {}) cannot reach the grid (h too coarse)", .0.x1, .0.x2)]
    UnreachableTerminal(Point),

    #[error("closure extension did not converge: {0}")]
    ExtensionUnconverged(String),

    #[error("weight field: {0}")]
    Field(String),

    #[error("argument: {0}")]
    Argument(String),

    #[error("localization is degenerate: cutoff mass is zero")]
    DegenerateLocalization,

    #[error("counterexample strip for n = {n} needs h <= {required:.3e}, got {h:.3e}")]
    StripUnresolved { n: u32, h: f64, required: f64 },

    #[error("config {key}: {msg}")]
    Config { key: String, msg: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { key: key.into(), msg: msg.into() }
    }
}
