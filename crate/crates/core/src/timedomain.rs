//! Time-domain memory and material functions as Dirichlet series over Bessel
//! zeros.
//!
//! ```text
//! Ψ_ν(t) = 4(ν+1)(ν+2) + 4(ν+1) Σ exp(-j²_{ν+2,n} t)
//! Φ_ν(t) = 4(ν+1) Σ exp(-j²_{ν,n} t)
//! 𝒥_ν(t) = 2(ν+2)/(ν+3) + 4(ν+1)(ν+2) t - 4(ν+1) Σ exp(-j²_{ν+2,n} t) / j²_{ν+2,n}
//! 𝒢_ν(t) = 4(ν+1) Σ exp(-j²_{ν,n} t) / j²_{ν,n}
//! ```
//!
//! Truncation is adaptive. For `Ψ` and `Φ` the neglected tail is bounded by a
//! geometric series using a lower bound on the gaps between rates. For `𝒥` and
//! `𝒢` the remainder `R_N = Σ_{n>N} 1/j²` is folded back in as one extra mode
//! at rate `j²_{N+1}`, which brackets the true tail from above and makes the
//! value at `t = 0` exact.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics;
use crate::specfun::Order;
use crate::zeros::{
    compute_zeros, hurwitz_zeta, mcmahon, rayleigh_tail, TailModel, ZeroError, ZeroTable,
};

/// Accuracy of zeros used by [`BesselModel`].
pub const MODEL_ZERO_TOL: f64 = 1e-13;
const INITIAL_ZEROS: usize = 128;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("t = {t} is below the series limit {min_time}; use the short-time asymptotic branch")]
    BelowMinTime { t: f64, min_time: f64 },
    #[error("{required} zeros are needed at this time but the table holds {available}")]
    InsufficientZeros { required: usize, available: usize },
    #[error("{required} terms are needed but the policy allows at most {max_terms}")]
    TermLimit { required: usize, max_terms: usize },
    #[error("zero table has order {found}, expected {expected}")]
    WrongTable { expected: f64, found: f64 },
    #[error("time must be finite and non-negative, got {0}")]
    InvalidTime(f64),
    #[error("invalid series policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Zeros(#[from] ZeroError),
}

/// How `R_N = Σ_{n>N} 1/j²` is obtained for the material functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemainderModel {
    /// Closed-form sum `1/(4(μ+1))` minus the partial sum.
    #[default]
    Rayleigh,
    /// Two-term McMahon estimate of the tail.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPolicy {
    tail_tol: f64,
    max_terms: usize,
    min_time: f64,
    remainder: RemainderModel,
}

impl SeriesPolicy {
    pub fn new(tail_tol: f64, max_terms: usize, min_time: f64) -> Result<Self, SeriesError> {
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(SeriesError::InvalidPolicy(format!(
                "tail_tol must lie in (0, 1), got {tail_tol}"
            )));
        }
        if max_terms < 100 {
            return Err(SeriesError::InvalidPolicy(format!(
                "max_terms must be at least 100, got {max_terms}"
            )));
        }
        if !(min_time > 0.0 && min_time.is_finite()) {
            return Err(SeriesError::InvalidPolicy(format!(
                "min_time must be positive, got {min_time}"
            )));
        }
        Ok(SeriesPolicy {
            tail_tol,
            max_terms,
            min_time,
            remainder: RemainderModel::default(),
        })
    }

    pub fn with_remainder(mut self, remainder: RemainderModel) -> Self {
        self.remainder = remainder;
        self
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn min_time(&self) -> f64 {
        self.min_time
    }

    pub fn remainder(&self) -> RemainderModel {
        self.remainder
    }
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        SeriesPolicy {
            tail_tol: 1e-12,
            max_terms: 10_000,
            min_time: 1e-6,
            remainder: RemainderModel::Rayleigh,
        }
    }
}

/// A truncated series value with its bound on the neglected part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    /// Number of zeros summed explicitly.
    pub terms: usize,
}

fn check_table(expected: f64, zeros: &ZeroTable) -> Result<(), SeriesError> {
    let found = zeros.order().value();
    if (found - expected).abs() > 1e-12 * expected.abs().max(1.0) {
        return Err(SeriesError::WrongTable { expected, found });
    }
    Ok(())
}

/// j_n from the table, or McMahon's estimate past its end.
fn zero_at(zeros: &ZeroTable, n: usize) -> f64 {
    zeros
        .get(n)
        .unwrap_or_else(|| mcmahon(zeros.order().value(), n))
}

/// Smallest `N` whose geometric tail bound `amp·e^{-λ_{N+1}t}/(1-e^{-gt})` is
/// below `tol`. `g` is a lower bound on the rate gaps past `N`: gaps of the
/// zeros tend to π monotonically from either side.
fn geometric_requirement(
    zeros: &ZeroTable,
    t: f64,
    amp: f64,
    policy: &SeriesPolicy,
) -> Result<(usize, f64), SeriesError> {
    let mut j_cur = zero_at(zeros, 1);
    for n in 1..=policy.max_terms() {
        let j_next = zero_at(zeros, n + 1);
        let lam = j_next * j_next;
        let g = 2.0 * j_next * PI.min(j_next - j_cur);
        let bound = amp * (-lam * t).exp() / -(-g * t).exp_m1();
        if bound <= policy.tail_tol() {
            return Ok((n, bound));
        }
        j_cur = j_next;
    }
    Err(SeriesError::TermLimit {
        required: policy.max_terms() + 1,
        max_terms: policy.max_terms(),
    })
}

fn ensure_available(zeros: &ZeroTable, n: usize) -> Result<(), SeriesError> {
    // N explicit terms plus j_{N+1}
    if zeros.len() < n + 1 {
        return Err(SeriesError::InsufficientZeros {
            required: n + 1,
            available: zeros.len(),
        });
    }
    Ok(())
}

fn exp_sum(zeros: &[f64], t: f64, inverse: bool) -> f64 {
    // smallest terms first
    zeros
        .iter()
        .rev()
        .map(|j| {
            let lam = j * j;
            let e = (-lam * t).exp();
            if inverse {
                e / lam
            } else {
                e
            }
        })
        .sum()
}

fn check_rate_time(t: f64, policy: &SeriesPolicy) -> Result<(), SeriesError> {
    if !t.is_finite() || t < 0.0 {
        return Err(SeriesError::InvalidTime(t));
    }
    if t < policy.min_time() {
        return Err(SeriesError::BelowMinTime {
            t,
            min_time: policy.min_time(),
        });
    }
    Ok(())
}

/// `Ψ_ν(t)` with its tail bound. `zeros` must be a table for order `ν+2`.
pub fn psi_series(
    order: Order,
    t: f64,
    policy: &SeriesPolicy,
    zeros: &ZeroTable,
) -> Result<SeriesValue, SeriesError> {
    let nu = order.value();
    check_table(nu + 2.0, zeros)?;
    check_rate_time(t, policy)?;
    let amp = 4.0 * (nu + 1.0);
    let (n, bound) = geometric_requirement(zeros, t, amp, policy)?;
    ensure_available(zeros, n)?;
    let value = amp * (nu + 2.0) + amp * exp_sum(&zeros.zeros()[..n], t, false);
    Ok(SeriesValue {
        value,
        tail_bound: bound,
        terms: n,
    })
}

/// `Φ_ν(t)` with its tail bound. `zeros` must be a table for order `ν`.
pub fn phi_series(
    order: Order,
    t: f64,
    policy: &SeriesPolicy,
    zeros: &ZeroTable,
) -> Result<SeriesValue, SeriesError> {
    let nu = order.value();
    check_table(nu, zeros)?;
    check_rate_time(t, policy)?;
    let amp = 4.0 * (nu + 1.0);
    let (n, bound) = geometric_requirement(zeros, t, amp, policy)?;
    ensure_available(zeros, n)?;
    Ok(SeriesValue {
        value: amp * exp_sum(&zeros.zeros()[..n], t, false),
        tail_bound: bound,
        terms: n,
    })
}

pub fn psi(
    order: Order,
    t: f64,
    policy: &SeriesPolicy,
    zeros: &ZeroTable,
) -> Result<f64, SeriesError> {
    psi_series(order, t, policy, zeros).map(|v| v.value)
}

pub fn phi(
    order: Order,
    t: f64,
    policy: &SeriesPolicy,
    zeros: &ZeroTable,
) -> Result<f64, SeriesError> {
    phi_series(order, t, policy, zeros).map(|v| v.value)
}

/// `Σ_{n≤N} 1/j²` with compensated summation.
fn inverse_square_partial(zeros: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for j in zeros.iter().rev() {
        let x = 1.0 / (j * j);
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `R_N = Σ_{n>N} 1/j²_{μ,n}`.
pub fn rayleigh_remainder(zeros: &ZeroTable, n: usize, model: RemainderModel) -> f64 {
    let mu = zeros.order().value();
    match model {
        RemainderModel::Rayleigh => {
            let partial = inverse_square_partial(&zeros.zeros()[..n.min(zeros.len())]);
            (0.25 / (mu + 1.0) - partial).max(0.0)
        }
        RemainderModel::Asymptotic => rayleigh_tail(mu, n, TailModel::TwoTerm),
    }
}

/// Number of explicit terms for the corrected `𝒥`/`𝒢` sums: smallest `N` with
/// `amp·R_N·e^{-λ_{N+1}t} ≤ tail_tol`.
fn corrected_requirement(
    zeros: &ZeroTable,
    t: f64,
    amp: f64,
    policy: &SeriesPolicy,
) -> Result<usize, SeriesError> {
    let mu = zeros.order().value();
    let mut remainder = 0.25 / (mu + 1.0);
    for n in 1..=policy.max_terms() {
        let j = zero_at(zeros, n);
        remainder -= 1.0 / (j * j);
        let j_next = zero_at(zeros, n + 1);
        // the running difference loses digits; the closed-form tail does not
        let r = if n + 1 > zeros.len() || remainder < 1e-8 {
            rayleigh_tail(mu, n, TailModel::TwoTerm)
        } else {
            remainder
        };
        if amp * r * (-j_next * j_next * t).exp() <= policy.tail_tol() {
            return Ok(n);
        }
    }
    Err(SeriesError::TermLimit {
        required: policy.max_terms() + 1,
        max_terms: policy.max_terms(),
    })
}

/// `Σ_{n≤N} e^{-λt}/λ + R_N e^{-λ_{N+1}t}` and the bracket width.
fn corrected_sum(
    zeros: &ZeroTable,
    t: f64,
    amp: f64,
    policy: &SeriesPolicy,
) -> Result<(f64, f64, usize), SeriesError> {
    if !t.is_finite() || t < 0.0 {
        return Err(SeriesError::InvalidTime(t));
    }
    let n = if t == 0.0 {
        // any N is exact at t = 0
        zeros.len().saturating_sub(1).min(policy.max_terms()).max(1)
    } else {
        corrected_requirement(zeros, t, amp, policy)?
    };
    ensure_available(zeros, n)?;
    let r = rayleigh_remainder(zeros, n, policy.remainder());
    let j_next = zeros.zeros()[n];
    let tail = r * (-j_next * j_next * t).exp();
    let sum = exp_sum(&zeros.zeros()[..n], t, true) + tail;
    let bracket = if t == 0.0 { 0.0 } else { amp * tail };
    Ok((sum, bracket, n))
}

/// `𝒥_ν(t)` with its bracket. `zeros` must be a table for order `ν+2`.
pub fn creep_compliance_series(
    order: Order,
    t: f64,
    policy: &SeriesPolicy,
    zeros: &ZeroTable,
) -> Result<SeriesValue, SeriesError> {
    let nu = order.value();
    check_table(nu + 2.0, zeros)?;
    let amp = 4.0 * (nu + 1.0);
    let (sum, bracket, n) = corrected_sum(zeros, t, amp, policy)?;
    let value = 2.0 * (nu + 2.0) / (nu + 3.0) + amp * (nu + 2.0) * t - amp * sum;
    Ok(SeriesValue {
        value,
        tail_bound: bracket,
        terms: n,
    })
}

/// `𝒢_ν(t)` with its bracket. `zeros` must be a table for order `ν`.
pub fn relaxation_modulus_series(
    order: Order,
    t: f64,
    policy: &SeriesPolicy,
    zeros: &ZeroTable,
) -> Result<SeriesValue, SeriesError> {
    let nu = order.value();
    check_table(nu, zeros)?;
    let amp = 4.0 * (nu + 1.0);
    let (sum, bracket, n) = corrected_sum(zeros, t, amp, policy)?;
    Ok(SeriesValue {
        value: amp * sum,
        tail_bound: bracket,
        terms: n,
    })
}

pub fn creep_compliance(
    order: Order,
    t: f64,
    policy: &SeriesPolicy,
    zeros: &ZeroTable,
) -> Result<f64, SeriesError> {
    creep_compliance_series(order, t, policy, zeros).map(|v| v.value)
}

pub fn relaxation_modulus(
    order: Order,
    t: f64,
    policy: &SeriesPolicy,
    zeros: &ZeroTable,
) -> Result<f64, SeriesError> {
    relaxation_modulus_series(order, t, policy, zeros).map(|v| v.value)
}

/// Kernel `c + Σ a_n e^{-λ_n t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub constant: f64,
    pub amplitudes: Vec<f64>,
    pub rates: Vec<f64>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn kernel(&self, t: f64) -> f64 {
        self.constant
            + self
                .amplitudes
                .iter()
                .zip(&self.rates)
                .rev()
                .map(|(a, l)| a * (-l * t).exp())
                .sum::<f64>()
    }

    /// `∫_0^t` of the kernel.
    pub fn integral(&self, t: f64) -> f64 {
        self.constant * t
            + self
                .amplitudes
                .iter()
                .zip(&self.rates)
                .rev()
                .map(|(a, l)| a * -(-l * t).exp_m1() / l)
                .sum::<f64>()
    }
}

/// `Σ_{k>n} 1/j_k⁴` from `σ₂ = 1/(16(μ+1)²(μ+2))`, or from the McMahon form
/// once the running difference has lost its digits.
fn inverse_fourth_remainder(zeros: &ZeroTable, n: usize) -> f64 {
    let mu = zeros.order().value();
    let sigma2 = 1.0 / (16.0 * (mu + 1.0).powi(2) * (mu + 2.0));
    let partial: f64 = zeros.zeros()[..n]
        .iter()
        .rev()
        .map(|j| (j * j).powi(-2))
        .sum();
    let r = sigma2 - partial;
    if r > 1e-6 * sigma2 {
        r
    } else {
        hurwitz_zeta(4.0, n as f64 + 1.0 + 0.5 * mu - 0.25) / PI.powi(4)
    }
}

fn modes_from(
    zeros: &ZeroTable,
    n: usize,
    amp: f64,
    constant: f64,
    remainder: RemainderModel,
) -> Result<ModeSet, SeriesError> {
    ensure_available(zeros, n)?;
    let mut amplitudes = vec![amp; n];
    let mut rates: Vec<f64> = zeros.zeros()[..n].iter().map(|j| j * j).collect();
    // lumped tail mode w·e^{-μt} with the same ∫ and ∫t as the dropped terms;
    // μ = R₁/R₂ ≥ λ_{N+1}, so the step response stays within the tail bound
    let r1 = rayleigh_remainder(zeros, n, remainder);
    let r2 = inverse_fourth_remainder(zeros, n);
    let j_next = zeros.zeros()[n];
    let lam = (r1 / r2).max(j_next * j_next);
    amplitudes.push(amp * r1 * lam);
    rates.push(lam);
    Ok(ModeSet {
        constant,
        amplitudes,
        rates,
    })
}

/// Modes of `Ψ_ν` whose running integral is `𝒥_ν - 1` with `n` explicit terms.
pub fn creep_modes(
    order: Order,
    zeros: &ZeroTable,
    n: usize,
    remainder: RemainderModel,
) -> Result<ModeSet, SeriesError> {
    let nu = order.value();
    check_table(nu + 2.0, zeros)?;
    let amp = 4.0 * (nu + 1.0);
    modes_from(zeros, n, amp, amp * (nu + 2.0), remainder)
}

/// Modes of `-Φ_ν` whose running integral is `𝒢_ν - 1` with `n` explicit terms.
pub fn relax_modes(
    order: Order,
    zeros: &ZeroTable,
    n: usize,
    remainder: RemainderModel,
) -> Result<ModeSet, SeriesError> {
    let nu = order.value();
    check_table(nu, zeros)?;
    modes_from(zeros, n, -4.0 * (nu + 1.0), 0.0, remainder)
}

/// Which function a curve samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// `Ψ_ν`
    CreepRate,
    /// `Φ_ν`
    RelaxRate,
    /// `𝒥_ν`
    CreepCompliance,
    /// `𝒢_ν`
    RelaxModulus,
    /// strain from a stress history
    StrainResponse,
    /// stress from a strain history
    StressResponse,
}

impl CurveKind {
    pub const MATERIAL: [CurveKind; 4] = [
        CurveKind::CreepRate,
        CurveKind::RelaxRate,
        CurveKind::CreepCompliance,
        CurveKind::RelaxModulus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::CreepRate => "creep_rate",
            CurveKind::RelaxRate => "relax_rate",
            CurveKind::CreepCompliance => "creep_compliance",
            CurveKind::RelaxModulus => "relax_modulus",
            CurveKind::StrainResponse => "strain_response",
            CurveKind::StressResponse => "stress_response",
        }
    }

    /// Order of the Bessel zeros the series runs over, relative to `ν`.
    pub fn zero_order_shift(self) -> f64 {
        match self {
            CurveKind::CreepRate | CurveKind::CreepCompliance | CurveKind::StrainResponse => 2.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CurveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "creep_rate" | "psi" => Ok(CurveKind::CreepRate),
            "relax_rate" | "phi" => Ok(CurveKind::RelaxRate),
            "creep_compliance" | "creep" => Ok(CurveKind::CreepCompliance),
            "relax_modulus" | "modulus" => Ok(CurveKind::RelaxModulus),
            "strain_response" => Ok(CurveKind::StrainResponse),
            "stress_response" => Ok(CurveKind::StressResponse),
            other => Err(format!("unknown curve kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Series,
    AsymptoticShort,
    AsymptoticLong,
    Oracle,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Series => "series",
            Provenance::AsymptoticShort => "asymptotic_short",
            Provenance::AsymptoticLong => "asymptotic_long",
            Provenance::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialCurve {
    pub order: Order,
    pub kind: CurveKind,
    pub samples: Vec<Sample>,
}

impl MaterialCurve {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].value >= w[0].value)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].value <= w[0].value)
    }
}

/// Checks a sample grid: finite, strictly increasing, and `t > 0` (or
/// `t ≥ 0` when `allow_zero`).
pub fn validate_grid(t_grid: &[f64], allow_zero: bool) -> Result<(), SeriesError> {
    if t_grid.is_empty() {
        return Err(SeriesError::InvalidGrid("grid is empty".into()));
    }
    for &t in t_grid {
        if !t.is_finite() || t < 0.0 || (t == 0.0 && !allow_zero) {
            return Err(SeriesError::InvalidGrid(format!("invalid time {t}")));
        }
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SeriesError::InvalidGrid(
            "times must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// A member of the model class with zero tables grown on demand.
#[derive(Debug, Clone)]
pub struct BesselModel {
    order: Order,
    policy: SeriesPolicy,
    zeros_nu: ZeroTable,
    zeros_nu2: ZeroTable,
}

impl BesselModel {
    pub fn new(order: Order, policy: SeriesPolicy) -> Result<Self, SeriesError> {
        let nu = order.value();
        Ok(BesselModel {
            order,
            policy,
            zeros_nu: compute_zeros(nu, INITIAL_ZEROS, MODEL_ZERO_TOL)?,
            zeros_nu2: compute_zeros(nu + 2.0, INITIAL_ZEROS, MODEL_ZERO_TOL)?,
        })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn policy(&self) -> &SeriesPolicy {
        &self.policy
    }

    /// Zeros of `J_ν` (relaxation side).
    pub fn zeros_nu(&self) -> &ZeroTable {
        &self.zeros_nu
    }

    /// Zeros of `J_{ν+2}` (creep side).
    pub fn zeros_nu2(&self) -> &ZeroTable {
        &self.zeros_nu2
    }

    pub fn table_for(&self, kind: CurveKind) -> &ZeroTable {
        if kind.zero_order_shift() > 0.0 {
            &self.zeros_nu2
        } else {
            &self.zeros_nu
        }
    }

    fn grow(&mut self, kind: CurveKind, required: usize) -> Result<(), SeriesError> {
        let shift = kind.zero_order_shift();
        let current = self.table_for(kind).len();
        let count = required.max(2 * current);
        let table = compute_zeros(self.order.value() + shift, count, MODEL_ZERO_TOL)?;
        if shift > 0.0 {
            self.zeros_nu2 = table;
        } else {
            self.zeros_nu = table;
        }
        Ok(())
    }

    fn eval_with(&self, kind: CurveKind, t: f64) -> Result<SeriesValue, SeriesError> {
        let p = &self.policy;
        match kind {
            CurveKind::CreepRate => psi_series(self.order, t, p, &self.zeros_nu2),
            CurveKind::RelaxRate => phi_series(self.order, t, p, &self.zeros_nu),
            CurveKind::CreepCompliance => {
                creep_compliance_series(self.order, t, p, &self.zeros_nu2)
            }
            CurveKind::RelaxModulus => relaxation_modulus_series(self.order, t, p, &self.zeros_nu),
            _ => Err(SeriesError::InvalidGrid(format!(
                "{kind} is not a material function"
            ))),
        }
    }

    /// Series value, growing the zero table as needed.
    pub fn series(&mut self, kind: CurveKind, t: f64) -> Result<SeriesValue, SeriesError> {
        loop {
            match self.eval_with(kind, t) {
                Err(SeriesError::InsufficientZeros { required, .. }) => {
                    self.grow(kind, required)?
                }
                other => return other,
            }
        }
    }

    /// Makes sure every `t` in the grid can be evaluated without growing.
    pub fn prepare(&mut self, kind: CurveKind, t_grid: &[f64]) -> Result<(), SeriesError> {
        let t_min = t_grid
            .iter()
            .copied()
            .filter(|&t| t >= self.policy.min_time())
            .fold(f64::INFINITY, f64::min);
        if t_min.is_finite() {
            self.series(kind, t_min)?;
        }
        Ok(())
    }

    pub fn psi(&mut self, t: f64) -> Result<f64, SeriesError> {
        self.series(CurveKind::CreepRate, t).map(|v| v.value)
    }

    pub fn phi(&mut self, t: f64) -> Result<f64, SeriesError> {
        self.series(CurveKind::RelaxRate, t).map(|v| v.value)
    }

    pub fn creep_compliance(&mut self, t: f64) -> Result<f64, SeriesError> {
        self.series(CurveKind::CreepCompliance, t).map(|v| v.value)
    }

    pub fn relaxation_modulus(&mut self, t: f64) -> Result<f64, SeriesError> {
        self.series(CurveKind::RelaxModulus, t).map(|v| v.value)
    }

    /// One sample: the series at `t ≥ min_time` (and at `t = 0` for the
    /// material functions), the short-time asymptote below that.
    fn sample_at(&self, kind: CurveKind, t: f64) -> Result<Sample, SeriesError> {
        let material = matches!(kind, CurveKind::CreepCompliance | CurveKind::RelaxModulus);
        if t < self.policy.min_time() && !(material && t == 0.0) {
            let value = asymptotics::short_time(kind, self.order, t);
            return Ok(Sample {
                t,
                value,
                provenance: Provenance::AsymptoticShort,
            });
        }
        let v = self.eval_with(kind, t)?;
        Ok(Sample {
            t,
            value: v.value,
            provenance: Provenance::Series,
        })
    }

    /// Samples one of the four material functions over a grid. Samples are
    /// evaluated in parallel against tables fixed beforehand, so the result
    /// does not depend on scheduling.
    pub fn sample_curve(
        &mut self,
        kind: CurveKind,
        t_grid: &[f64],
    ) -> Result<MaterialCurve, SeriesError> {
        let material = matches!(kind, CurveKind::CreepCompliance | CurveKind::RelaxModulus);
        if !CurveKind::MATERIAL.contains(&kind) {
            return Err(SeriesError::InvalidGrid(format!(
                "{kind} curves come from the hereditary module"
            )));
        }
        validate_grid(t_grid, material)?;
        self.prepare(kind, t_grid)?;
        let this = &*self;
        let samples = t_grid
            .par_iter()
            .map(|&t| this.sample_at(kind, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MaterialCurve {
            order: self.order,
            kind,
            samples,
        })
    }
}

/// Samples `kind` for order `ν` over `t_grid`.
pub fn sample_curve(
    order: Order,
    kind: CurveKind,
    t_grid: &[f64],
    policy: &SeriesPolicy,
) -> Result<MaterialCurve, SeriesError> {
    BesselModel::new(order, *policy)?.sample_curve(kind, t_grid)
}

/// `count` log-spaced points on `[lo, hi]` (the end points included).
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    // base 10 so that decade points come out exact
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|k| match k {
            0 => lo,
            _ if k + 1 == count => hi,
            _ => 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64),
        })
        .collect()
}

/// `count` uniformly spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}
