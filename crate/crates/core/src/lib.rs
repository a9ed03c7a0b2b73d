//! Bessel-class linear viscoelastic models.
//!
//! Memory functions `Ψ_ν`, `Φ_ν` and material functions `𝒥_ν`, `𝒢_ν` are
//! defined in the Laplace domain through ratios of modified Bessel functions
//! and evaluated in the time domain as Dirichlet series over the zeros of
//! `J_ν`. Numerical Laplace inversion provides an independent check, and a
//! hereditary-integral engine evolves responses to arbitrary load histories.
//!
//! ```
//! use bessel_models::{BesselModel, Order, SeriesPolicy};
//!
//! let mut model = BesselModel::new(Order::new(0.0)?, SeriesPolicy::default())?;
//! let g = model.relaxation_modulus(0.0)?;
//! assert!((g - 1.0).abs() < 1e-8);
//! # Ok::<(), bessel_models::Error>(())
//! ```

use thiserror::Error;

pub mod asymptotics;
pub mod cli;
pub mod hereditary;
pub mod laplace;
pub mod specfun;
pub mod timedomain;
pub mod validation;
pub mod zeros;

pub use asymptotics::{AsymptoticBranch, AsymptoticError, BranchKind, CrossoverRow};
pub use hereditary::{HereditaryError, Interpolation, LoadHistory};
pub use laplace::{LaplaceError, TalbotConfig, TalbotEstimate};
pub use specfun::{Order, SpecFunError};
pub use timedomain::{
    BesselModel, CurveKind, MaterialCurve, Provenance, RemainderModel, Sample, SeriesError,
    SeriesPolicy,
};
pub use zeros::{ZeroError, ZeroTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error(transparent)]
    Laplace(#[from] LaplaceError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Asymptotic(#[from] AsymptoticError),
    #[error(transparent)]
    Hereditary(#[from] HereditaryError),
}

impl Error {
    /// Short machine-readable label for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SpecFun(_) => "special_function",
            Error::Zeros(_) => "zeros",
            Error::Laplace(_) => "laplace",
            Error::Series(_) => "series",
            Error::Asymptotic(_) => "asymptotic",
            Error::Hereditary(_) => "hereditary",
        }
    }
}
