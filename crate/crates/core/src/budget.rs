//! Memory budget guard for dense tensor operators.
//!
//! A projector of order `l` over dimension `D` is stored as a dense
//! `D^l x D^l` matrix, so the footprint grows like `D^(2l)`.  Constructors
//! check the requested size against a budget before allocating and report
//! the required size when they refuse.

use crate::error::{Error, Result};

/// Default cap on one tensor axis: `D^l <= 4096`, i.e. 128 MiB per dense
/// `f64` operator.
pub const DEFAULT_MAX_SIDE: u128 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorBudget {
    /// Maximum number of bytes a single dense operator may occupy.
    pub max_bytes: u128,
}

impl Default for TensorBudget {
    fn default() -> Self {
        TensorBudget {
            max_bytes: DEFAULT_MAX_SIDE * DEFAULT_MAX_SIDE * 8,
        }
    }
}

impl TensorBudget {
    #[must_use]
    pub fn with_max_bytes(max_bytes: u128) -> Self {
        TensorBudget { max_bytes }
    }

    /// Side length `D^l` of a dense order-`l` operator, without overflow.
    #[must_use]
    pub fn side(dim: usize, order: usize) -> u128 {
        let mut side: u128 = 1;
        for _ in 0..order {
            side = side.saturating_mul(dim as u128);
        }
        side
    }

    /// Checks that a dense `D^l x D^l` matrix of `f64` fits, returning the
    /// admissible side length.
    pub fn check(&self, dim: usize, order: usize) -> Result<usize> {
        let side = Self::side(dim, order);
        let required = side.saturating_mul(side).saturating_mul(8);
        if required > self.max_bytes {
            return Err(Error::BudgetExceeded {
                dim,
                order,
                required,
                budget: self.max_bytes,
            });
        }
        Ok(side as usize)
    }
}
