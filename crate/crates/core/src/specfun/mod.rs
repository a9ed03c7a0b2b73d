//! Special functions for real order and real argument.
//!
//! Gamma, Bessel functions of the first kind `J_ν` and modified Bessel
//! functions `I_ν` for orders `ν > -1`, plus an overflow-free evaluation of
//! the contiguous ratio `I_{μ+1}(z) / I_μ(z)` which the memory functions are
//! built from.
//!
//! All functions are pure and safe to call from any number of threads.

mod bessel_i;
mod bessel_j;
mod gamma;

pub use bessel_i::{bessel_i, bessel_i_ratio};
pub(crate) use bessel_i::{hankel_sum, ratio_next};
pub(crate) use bessel_j::j_and_deriv;
pub use bessel_j::{bessel_j, bessel_j_deriv};
pub use gamma::{gamma, ln_gamma, recip_gamma};

use std::fmt;

use thiserror::Error;

/// Errors from special function evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("gamma function has a pole at {0}")]
    Pole(f64),
    #[error("order {0} is outside the supported range (must be > -1)")]
    InvalidOrder(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("result overflows f64 (log magnitude {log_magnitude:.3}); use a ratio instead")]
    Overflow { log_magnitude: f64 },
    #[error("{what} did not converge within {iterations} iterations")]
    NotConverged {
        what: &'static str,
        iterations: usize,
    },
}

/// Order `ν` of a member of the model class. Always `ν > -1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Order(f64);

impl Order {
    pub fn new(nu: f64) -> Result<Self, SpecFunError> {
        if nu.is_finite() && nu > -1.0 {
            Ok(Order(nu))
        } else {
            Err(SpecFunError::InvalidOrder(nu))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Order shifted by `k`; shifting up never leaves the valid range.
    #[inline]
    pub fn shifted(self, k: u32) -> Order {
        Order(self.0 + f64::from(k))
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for Order {
    type Error = SpecFunError;

    fn try_from(nu: f64) -> Result<Self, Self::Error> {
        Order::new(nu)
    }
}

/// Accuracy controls for series-based evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalAccuracy {
    rel_tol: f64,
    max_terms: usize,
}

impl EvalAccuracy {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self, SpecFunError> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(SpecFunError::InvalidArgument(format!(
                "rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        if max_terms < 10 {
            return Err(SpecFunError::InvalidArgument(format!(
                "max_terms must be at least 10, got {max_terms}"
            )));
        }
        Ok(EvalAccuracy { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for EvalAccuracy {
    fn default() -> Self {
        EvalAccuracy {
            rel_tol: 1e-12,
            max_terms: 200,
        }
    }
}
