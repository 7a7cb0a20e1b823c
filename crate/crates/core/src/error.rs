use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} items, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("similarity matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },

    #[error("similarity at ({i}, {j}) is {value}, off-diagonal similarities must be finite and > 0")]
    NonPositiveSimilarity { i: usize, j: usize, value: f64 },

    #[error("item {item} out of range for {n} items")]
    ItemOutOfRange { item: usize, n: usize },

    #[error("lca needs two distinct items, got {0} twice")]
    SameItem(usize),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
