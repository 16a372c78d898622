//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("sample selection failed: {0}")]
    Selection(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("all valves closed: dead network")]
    DeadNetwork,
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
