//! Crate wide error type.  Every fallible public operation returns
//! [`Result`]; invalid inputs are reported, never panicked on.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("tensor order {order} with dimension {dim} needs {required} bytes, budget is {budget} bytes")]
    BudgetExceeded {
        dim: usize,
        order: usize,
        required: u128,
        budget: u128,
    },

    #[error("slot {slot} out of range for order {order}")]
    InvalidSlot { slot: usize, order: usize },

    #[error("multi-index entry {entry} out of range 1..={dim}")]
    InvalidIndexEntry { entry: usize, dim: usize },

    #[error("level {level} outside the catalog range 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("rank of the degree-{level} Gram matrix is {found}, expected {expected}")]
    RankMismatch {
        level: usize,
        found: usize,
        expected: usize,
    },

    #[error("evaluation point has squared norm {norm2}, expected 1 within 1e-12")]
    PointOffSphere { norm2: f64 },

    #[error("coupling constant must be positive and finite, got {0}")]
    InvalidCoupling(f64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("radial grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("eigensolver failed to converge: {0}")]
    NoConvergence(String),

    #[error("matrix is not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
