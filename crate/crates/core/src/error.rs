use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("rejected input: {0}")]
    Rejected(String),
    #[error("action `{action}` is not enabled in state `{state}`")]
    NotEnabled { state: String, action: String },
    #[error("nondeterministic input: {0}")]
    Nondeterministic(String),
    #[error("not reactive: {0}")]
    NotReactive(String),
    #[error("{what} exceeded the cap of {limit} (set PABISIM_MAX_NODES to raise it)")]
    CapExceeded { what: String, limit: usize },
    #[error("formula syntax error at byte {pos}: {message}")]
    FormulaSyntax { pos: usize, message: String },
    #[error("formula outside the affine fragment: {0}")]
    OutsideFragment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

const DEFAULT_MAX_NODES: usize = 200_000;

/// Enumeration cap for games, searches and scheduler trees; `PABISIM_MAX_NODES` overrides it.
pub fn max_nodes() -> usize {
    std::env::var("PABISIM_MAX_NODES")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(DEFAULT_MAX_NODES)
}
