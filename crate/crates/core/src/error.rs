use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid level: {op} needs level {need}, got {got}")]
    InvalidLevel {
        op: &'static str,
        need: String,
        got: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration blew up at t = {t}")]
    Blowup { t: f64 },
    #[error("inconsistent trajectory: {0}")]
    Inconsistent(String),
    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn need_level(op: &'static str, need: &str, got: usize) -> Error {
    Error::InvalidLevel {
        op,
        need: need.to_string(),
        got,
    }
}
