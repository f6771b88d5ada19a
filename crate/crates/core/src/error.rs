use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("negative entry {value} at {index:?}")]
    NotNonnegative { index: Vec<usize>, value: f64 },

    #[error("Cauchy denominator vanishes at index {0:?}")]
    SingularCauchy(Vec<usize>),

    #[error("edge {edge:?} has {found} vertices but the hypergraph is {expected}-uniform")]
    Arity {
        edge: Vec<usize>,
        expected: usize,
        found: usize,
    },

    #[error("no positive term x_i^(m-1) (Ax^(m-1))_i at x (max term {phi})")]
    NotPBehaviorAt { x: Vec<f64>, phi: f64 },

    #[error("basis tensor at constant index {0:?} cannot be negated")]
    DiagonalNegation(Vec<usize>),

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
