//! Short- and long-time approximants and where they hand over.
//!
//! | function | short time | long time |
//! |---|---|---|
//! | `Ψ_ν` | `2(ν+1)/√π · t^{-1/2}` | `4(ν+1)(ν+2)` |
//! | `Φ_ν` | `2(ν+1)/√π · t^{-1/2}` | `4(ν+1) e^{-j²t}` |
//! | `𝒥_ν` | `1 + 4(ν+1)/√π · t^{1/2}` | `2(ν+2)/(ν+3) + 4(ν+1)(ν+2) t` |
//! | `𝒢_ν` | `1 - 4(ν+1)/√π · t^{1/2}` | `4(ν+1)/j² · e^{-j²t}` |
//!
//! with `j = j_{ν,1}`. The short-time `𝒢` approximant turns negative for
//! `t > π/(16(ν+1)²)`; it is returned as is.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::Order;
use crate::timedomain::{validate_grid, BesselModel, CurveKind, SeriesError, SeriesPolicy};
use crate::zeros::ZeroTable;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticError {
    #[error("short- and long-time errors do not cross on [{lo}, {hi}]")]
    NoCrossover { lo: f64, hi: f64 },
    #[error("{0} has no asymptotic approximants")]
    UnsupportedKind(CurveKind),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    ShortTime,
    LongTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticBranch {
    pub kind: BranchKind,
    pub order: Order,
}

impl AsymptoticBranch {
    pub fn short(order: Order) -> Self {
        AsymptoticBranch {
            kind: BranchKind::ShortTime,
            order,
        }
    }

    pub fn long(order: Order) -> Self {
        AsymptoticBranch {
            kind: BranchKind::LongTime,
            order,
        }
    }
}

fn rate_amplitude(nu: f64) -> f64 {
    2.0 * (nu + 1.0) / PI.sqrt()
}

pub fn psi_asymptotic(branch: &AsymptoticBranch, t: f64) -> f64 {
    let nu = branch.order.value();
    match branch.kind {
        BranchKind::ShortTime => rate_amplitude(nu) / t.sqrt(),
        BranchKind::LongTime => 4.0 * (nu + 1.0) * (nu + 2.0),
    }
}

/// `zeros` is the table for order `ν`; only its first entry is used.
pub fn phi_asymptotic(branch: &AsymptoticBranch, t: f64, zeros: &ZeroTable) -> f64 {
    let nu = branch.order.value();
    match branch.kind {
        BranchKind::ShortTime => rate_amplitude(nu) / t.sqrt(),
        BranchKind::LongTime => {
            let lam = zeros.first() * zeros.first();
            4.0 * (nu + 1.0) * (-lam * t).exp()
        }
    }
}

pub fn creep_asymptotic(branch: &AsymptoticBranch, t: f64) -> f64 {
    let nu = branch.order.value();
    match branch.kind {
        BranchKind::ShortTime => 1.0 + 2.0 * rate_amplitude(nu) * t.sqrt(),
        BranchKind::LongTime => 2.0 * (nu + 2.0) / (nu + 3.0) + 4.0 * (nu + 1.0) * (nu + 2.0) * t,
    }
}

/// `zeros` is the table for order `ν`; only its first entry is used.
pub fn modulus_asymptotic(branch: &AsymptoticBranch, t: f64, zeros: &ZeroTable) -> f64 {
    let nu = branch.order.value();
    match branch.kind {
        BranchKind::ShortTime => 1.0 - 2.0 * rate_amplitude(nu) * t.sqrt(),
        BranchKind::LongTime => {
            let lam = zeros.first() * zeros.first();
            4.0 * (nu + 1.0) / lam * (-lam * t).exp()
        }
    }
}

/// Short-time approximant of any of the four material functions.
pub fn short_time(kind: CurveKind, order: Order, t: f64) -> f64 {
    let b = AsymptoticBranch::short(order);
    let nu = order.value();
    match kind {
        CurveKind::CreepRate | CurveKind::RelaxRate => rate_amplitude(nu) / t.sqrt(),
        CurveKind::CreepCompliance | CurveKind::StrainResponse => creep_asymptotic(&b, t),
        CurveKind::RelaxModulus | CurveKind::StressResponse => {
            1.0 - 2.0 * rate_amplitude(nu) * t.sqrt()
        }
    }
}

/// Approximant of `kind` on `branch`, taking the zero tables from `model`.
pub fn branch_value(
    model: &BesselModel,
    kind: CurveKind,
    branch: &AsymptoticBranch,
    t: f64,
) -> Result<f64, AsymptoticError> {
    let z = model.zeros_nu();
    Ok(match kind {
        CurveKind::CreepRate => psi_asymptotic(branch, t),
        CurveKind::RelaxRate => phi_asymptotic(branch, t, z),
        CurveKind::CreepCompliance => creep_asymptotic(branch, t),
        CurveKind::RelaxModulus => modulus_asymptotic(branch, t, z),
        other => return Err(AsymptoticError::UnsupportedKind(other)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub t: f64,
    pub series: f64,
    pub short: f64,
    pub long: f64,
    pub best_branch: BranchKind,
}

impl CrossoverRow {
    pub fn short_error(&self) -> f64 {
        rel_err(self.short, self.series)
    }

    pub fn long_error(&self) -> f64 {
        rel_err(self.long, self.series)
    }
}

fn rel_err(approx: f64, exact: f64) -> f64 {
    ((approx - exact) / exact).abs()
}

fn row(model: &mut BesselModel, kind: CurveKind, t: f64) -> Result<CrossoverRow, AsymptoticError> {
    let order = model.order();
    let series = model.series(kind, t)?.value;
    let short = branch_value(model, kind, &AsymptoticBranch::short(order), t)?;
    let long = branch_value(model, kind, &AsymptoticBranch::long(order), t)?;
    // ties and NaNs (underflowed series) go to the long branch
    let best_branch = if rel_err(short, series) < rel_err(long, series) {
        BranchKind::ShortTime
    } else {
        BranchKind::LongTime
    };
    Ok(CrossoverRow {
        t,
        series,
        short,
        long,
        best_branch,
    })
}

/// Series value next to both approximants at every grid point.
pub fn crossover_report(
    order: Order,
    kind: CurveKind,
    t_grid: &[f64],
    policy: &SeriesPolicy,
) -> Result<Vec<CrossoverRow>, AsymptoticError> {
    let mut model = BesselModel::new(order, *policy)?;
    crossover_report_with(&mut model, kind, t_grid)
}

pub fn crossover_report_with(
    model: &mut BesselModel,
    kind: CurveKind,
    t_grid: &[f64],
) -> Result<Vec<CrossoverRow>, AsymptoticError> {
    validate_grid(t_grid, false)?;
    t_grid.iter().map(|&t| row(model, kind, t)).collect()
}

/// Time in `[t_lo, t_hi]` where the short- and long-time relative errors are
/// equal, by bisection in `ln t`.
pub fn crossover_time(
    order: Order,
    kind: CurveKind,
    t_lo: f64,
    t_hi: f64,
    policy: &SeriesPolicy,
) -> Result<f64, AsymptoticError> {
    let mut model = BesselModel::new(order, *policy)?;
    let mut diff = |t: f64| -> Result<f64, AsymptoticError> {
        let r = row(&mut model, kind, t)?;
        Ok(r.short_error() - r.long_error())
    };
    let (mut a, mut b) = (t_lo.ln(), t_hi.ln());
    let fa = diff(t_lo)?;
    let fb = diff(t_hi)?;
    if !(fa * fb < 0.0) {
        return Err(AsymptoticError::NoCrossover { lo: t_lo, hi: t_hi });
    }
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a < 1e-14 {
            break;
        }
        if diff(m.exp())?.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((0.5 * (a + b)).exp())
}
