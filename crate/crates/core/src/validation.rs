//! The invariant suite behind `bessel-models validate`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::asymptotics::{branch_value, AsymptoticBranch};
use crate::hereditary::{
    round_trip_step, strain_response_with, stress_response_with, Interpolation, LoadHistory,
    DEFAULT_STEPS_PER_UNIT,
};
use crate::laplace::{check_reciprocity, invert_phi, invert_psi, TalbotConfig};
use crate::specfun::Order;
use crate::timedomain::{linear_grid, log_grid, BesselModel, CurveKind, SeriesPolicy};
use crate::zeros::{compute_zeros, rayleigh_sum};
use crate::Error;

/// Orders shown in the published zero table.
pub const TABLE_ORDERS: [f64; 4] = [-0.5, 0.0, 0.5, 1.0];
/// First zeros and their squares at two decimals, same order as [`TABLE_ORDERS`].
#[allow(clippy::approx_constant)]
pub const TABLE_FIRST_ZEROS: [(f64, f64); 4] =
    [(1.57, 2.47), (2.40, 5.78), (3.14, 9.87), (3.83, 14.68)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub measured: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured <= tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, tolerance: f64, measured: f64) -> Self {
        Check {
            name: name.into(),
            tolerance,
            measured,
            pass: measured <= tolerance,
        }
    }
}

fn ord(nu: f64) -> Order {
    Order::new(nu).expect("suite orders are valid")
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn table_zeros() -> Result<Check, Error> {
    let mut worst = 0.0f64;
    for (nu, (j, j2)) in TABLE_ORDERS.iter().zip(TABLE_FIRST_ZEROS) {
        let z = compute_zeros(*nu, 1, 1e-12)?.first();
        worst = worst.max((z - j).abs()).max((z * z - j2).abs());
    }
    Ok(Check::at_most("table_first_zeros", 0.005, worst))
}

pub fn rayleigh_identity() -> Result<Check, Error> {
    let mut worst = 0.0f64;
    for &nu in &TABLE_ORDERS {
        let r = rayleigh_sum(&compute_zeros(nu, 100, 1e-12)?);
        worst = worst.max((r.corrected - 0.25 / (nu + 1.0)).abs());
    }
    Ok(Check::at_most("rayleigh_identity", 1e-8, worst))
}

pub fn normalization(policy: &SeriesPolicy) -> Result<Check, Error> {
    let mut worst = 0.0f64;
    for &nu in &TABLE_ORDERS {
        let mut m = BesselModel::new(ord(nu), *policy)?;
        worst = worst
            .max((m.creep_compliance(0.0)? - 1.0).abs())
            .max((m.relaxation_modulus(0.0)? - 1.0).abs());
    }
    Ok(Check::at_most("normalization_at_zero", 1e-8, worst))
}

pub fn reciprocity() -> Result<Check, Error> {
    let mut worst = 0.0f64;
    for &nu in &TABLE_ORDERS {
        for s in log_grid(1e-3, 1e6, 25) {
            worst = worst.max(check_reciprocity(ord(nu), s)?);
        }
    }
    Ok(Check::at_most("laplace_reciprocity", 1e-10, worst))
}

pub fn oracle_equivalence(policy: &SeriesPolicy) -> Result<Check, Error> {
    let cfg = TalbotConfig::default();
    let grid = log_grid(0.01, 5.0, 20);
    let mut worst = 0.0f64;
    for &nu in &TABLE_ORDERS {
        let mut m = BesselModel::new(ord(nu), *policy)?;
        for &t in &grid {
            worst = worst.max(rel(invert_psi(ord(nu), t, &cfg)?.value, m.psi(t)?));
            worst = worst.max(rel(invert_phi(ord(nu), t, &cfg)?.value, m.phi(t)?));
        }
    }
    Ok(Check::at_most("series_vs_talbot", 1e-6, worst))
}

/// Short branch at `t = 1e-4` and long branches on their ranges, `ν = 1`.
pub fn asymptotic_matching(policy: &SeriesPolicy) -> Result<Vec<Check>, Error> {
    let order = ord(1.0);
    let mut m = BesselModel::new(order, *policy)?;
    let mut out = Vec::new();
    for kind in CurveKind::MATERIAL {
        let t = 1e-4;
        let approx = branch_value(&m, kind, &AsymptoticBranch::short(order), t)?;
        let exact = m.series(kind, t)?.value;
        out.push(Check::at_most(
            format!("short_branch_{kind}"),
            0.02,
            rel(approx, exact),
        ));
    }
    for kind in CurveKind::MATERIAL {
        let from = match kind {
            CurveKind::CreepRate | CurveKind::CreepCompliance => 1.0,
            _ => 5.0,
        };
        let mut worst = 0.0f64;
        for t in [from, 2.0 * from, 4.0 * from] {
            let approx = branch_value(&m, kind, &AsymptoticBranch::long(order), t)?;
            worst = worst.max(rel(approx, m.series(kind, t)?.value));
        }
        out.push(Check::at_most(format!("long_branch_{kind}"), 1e-6, worst));
    }
    Ok(out)
}

/// `√t·Ψ` and `√t·Φ` against `2(ν+1)/√π` at `t = 1e-5`.
pub fn short_time_limit(policy: &SeriesPolicy) -> Result<Check, Error> {
    let t = 1e-5;
    let mut worst = 0.0f64;
    for &nu in &TABLE_ORDERS {
        let mut m = BesselModel::new(ord(nu), *policy)?;
        let amp = 2.0 * (nu + 1.0) / PI.sqrt();
        worst = worst
            .max(rel(m.psi(t)? * t.sqrt(), amp))
            .max(rel(m.phi(t)? * t.sqrt(), amp));
    }
    Ok(Check::at_most("short_time_limit", 0.01, worst))
}

pub fn step_identities(policy: &SeriesPolicy) -> Result<Check, Error> {
    let t_eval = linear_grid(0.0, 2.0, 41);
    let step = LoadHistory::unit_step(2.0)?;
    let mut worst = 0.0f64;
    for &nu in &TABLE_ORDERS {
        let mut m = BesselModel::new(ord(nu), *policy)?;
        let eps = strain_response_with(&mut m, &step, &t_eval)?;
        let sig = stress_response_with(&mut m, &step, &t_eval)?;
        for (k, &t) in t_eval.iter().enumerate() {
            worst = worst
                .max((eps.samples[k].value - m.creep_compliance(t)?).abs())
                .max((sig.samples[k].value - m.relaxation_modulus(t)?).abs());
        }
    }
    Ok(Check::at_most("step_response_identity", 1e-8, worst))
}

/// Count of forward differences of orders 1..=4 with the wrong sign.
pub fn monotonicity_violations(model: &mut BesselModel, grid: &[f64]) -> Result<usize, Error> {
    let mut diff: Vec<f64> = grid
        .iter()
        .map(|&t| model.phi(t))
        .collect::<Result<_, _>>()?;
    let mut bad = 0;
    for k in 1..=4 {
        diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        bad += diff.iter().filter(|d| !(sign * **d > 0.0)).count();
    }
    Ok(bad)
}

pub fn complete_monotonicity(policy: &SeriesPolicy) -> Result<Check, Error> {
    let grid = linear_grid(0.05, 5.0, 200);
    let mut bad = 0;
    for &nu in &TABLE_ORDERS {
        let mut m = BesselModel::new(ord(nu), *policy)?;
        bad += monotonicity_violations(&mut m, &grid)?;
    }
    Ok(Check::at_most(
        "phi_forward_difference_signs",
        0.0,
        bad as f64,
    ))
}

/// Error at default resolution plus observed order under one halving of the step.
pub fn round_trip(policy: &SeriesPolicy) -> Result<Vec<Check>, Error> {
    let mut worst = 0.0f64;
    let mut slowest = f64::INFINITY;
    let steps = 2 * DEFAULT_STEPS_PER_UNIT;
    for &nu in &TABLE_ORDERS {
        let mut m = BesselModel::new(ord(nu), *policy)?;
        let coarse =
            round_trip_step(&mut m, 2.0, steps, Interpolation::PiecewiseLinear, 0.1)?.max_error;
        let fine =
            round_trip_step(&mut m, 2.0, 2 * steps, Interpolation::PiecewiseLinear, 0.1)?.max_error;
        worst = worst.max(coarse);
        slowest = slowest.min((coarse / fine).log2());
    }
    Ok(vec![
        Check::at_most("round_trip_step", 0.02, worst),
        Check {
            name: "round_trip_order".into(),
            tolerance: 1.0,
            measured: slowest,
            pass: slowest >= 1.0,
        },
    ])
}

/// Every check in a fixed order.
pub fn run_suite(policy: &SeriesPolicy) -> Result<Vec<Check>, Error> {
    let mut out = vec![
        table_zeros()?,
        rayleigh_identity()?,
        normalization(policy)?,
        reciprocity()?,
        oracle_equivalence(policy)?,
    ];
    out.extend(asymptotic_matching(policy)?);
    out.push(short_time_limit(policy)?);
    out.push(step_identities(policy)?);
    out.push(complete_monotonicity(policy)?);
    out.extend(round_trip(policy)?);
    Ok(out)
}
