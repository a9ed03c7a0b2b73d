//! Responses to arbitrary causal load histories through the convolution form
//! of the constitutive law:
//!
//! ```text
//! ε(t) = σ(t) + ∫_0^t Ψ_ν(t - t') σ(t') dt'
//! σ(t) = ε(t) - ∫_0^t Φ_ν(t - t') ε(t') dt'
//! ```
//!
//! The kernel is expanded into exponential modes and every mode is carried as
//! an internal variable `h(t) = ∫_0^t e^{-λ(t-t')} x(t') dt'`, which is updated
//! exactly over each interval of a piecewise constant or linear input. The
//! last mode lumps the truncated tail so that a unit step reproduces `𝒥` and
//! `𝒢` exactly.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::Order;
use crate::timedomain::{
    creep_modes, relax_modes, BesselModel, CurveKind, MaterialCurve, ModeSet, Provenance, Sample,
    SeriesError, SeriesPolicy,
};

/// Steps per unit time used by [`round_trip_step`] at default resolution.
pub const DEFAULT_STEPS_PER_UNIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HereditaryError {
    #[error("invalid load history: {0}")]
    InvalidHistory(String),
    #[error("evaluation time {t} lies past the end of the history ({end})")]
    Extrapolation { t: f64, end: f64 },
    #[error("invalid evaluation grid: {0}")]
    InvalidEvalGrid(String),
    #[error("could not read history: {0}")]
    Read(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Value held from each sample to the next.
    PiecewiseConstant,
    #[default]
    PiecewiseLinear,
}

/// Sampled stress or strain history starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadHistory {
    times: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
}

#[derive(Deserialize)]
struct HistoryRow {
    time: f64,
    value: f64,
}

impl LoadHistory {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        interpolation: Interpolation,
    ) -> Result<Self, HereditaryError> {
        if times.len() != values.len() {
            return Err(HereditaryError::InvalidHistory(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(HereditaryError::InvalidHistory(
                "need at least two samples".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(HereditaryError::InvalidHistory(format!(
                "history must start at t = 0, got {}",
                times[0]
            )));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(HereditaryError::InvalidHistory("non-finite sample".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HereditaryError::InvalidHistory(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(LoadHistory {
            times,
            values,
            interpolation,
        })
    }

    /// Unit step switched on at `t = 0`, held until `t_end`.
    pub fn unit_step(t_end: f64) -> Result<Self, HereditaryError> {
        LoadHistory::new(
            vec![0.0, t_end],
            vec![1.0, 1.0],
            Interpolation::PiecewiseLinear,
        )
    }

    /// `f` sampled on `steps + 1` uniform points of `[0, t_end]`.
    pub fn from_fn<F: Fn(f64) -> f64>(
        t_end: f64,
        steps: usize,
        interpolation: Interpolation,
        f: F,
    ) -> Result<Self, HereditaryError> {
        let times: Vec<f64> = (0..=steps)
            .map(|k| t_end * k as f64 / steps as f64)
            .collect();
        let values = times.iter().map(|&t| f(t)).collect();
        LoadHistory::new(times, values, interpolation)
    }

    /// Reads a CSV with a header and columns `time,value`.
    pub fn from_csv<R: Read>(
        reader: R,
        interpolation: Interpolation,
    ) -> Result<Self, HereditaryError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for row in rdr.deserialize::<HistoryRow>() {
            let row = row.map_err(|e| HereditaryError::Read(e.to_string()))?;
            times.push(row.time);
            values.push(row.value);
        }
        LoadHistory::new(times, values, interpolation)
    }

    pub fn from_csv_path<P: AsRef<Path>>(
        path: P,
        interpolation: Interpolation,
    ) -> Result<Self, HereditaryError> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| HereditaryError::Read(format!("{}: {e}", path.as_ref().display())))?;
        LoadHistory::from_csv(file, interpolation)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Same samples scaled by `alpha`.
    pub fn scaled(&self, alpha: f64) -> LoadHistory {
        LoadHistory {
            values: self.values.iter().map(|v| alpha * v).collect(),
            ..self.clone()
        }
    }

    /// Value of the interpolant at `t` in `[0, end]`.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = segment_index(&self.times, t);
        self.segment_value(i, t)
    }

    fn segment_value(&self, i: usize, t: f64) -> f64 {
        if i + 1 >= self.times.len() {
            return *self.values.last().unwrap();
        }
        match self.interpolation {
            Interpolation::PiecewiseConstant => self.values[i],
            Interpolation::PiecewiseLinear => {
                let (t0, t1) = (self.times[i], self.times[i + 1]);
                let w = (t - t0) / (t1 - t0);
                self.values[i] + w * (self.values[i + 1] - self.values[i])
            }
        }
    }
}

/// Index of the segment `[t_i, t_{i+1})` holding `t`.
fn segment_index(times: &[f64], t: f64) -> usize {
    match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    }
}

/// Weights of the exact update over an interval of length `dt` for input
/// `x(u) = x_a + (x_b - x_a) u/dt`: the increment is `c0·x_a + c1·(x_b - x_a)/dt`.
fn weights(lam: f64, dt: f64) -> (f64, f64, f64) {
    let x = lam * dt;
    if x < 0.1 {
        // c0 = dt Σ (-x)^k/(k+1)!, c1 = dt² Σ (-x)^k/(k+2)!
        let mut c0 = 0.0;
        let mut c1 = 0.0;
        let mut term = 1.0;
        for k in 0..18 {
            c0 += term / (k + 1) as f64;
            c1 += term / ((k + 1) * (k + 2)) as f64;
            term *= -x / (k + 1) as f64;
        }
        ((-x).exp(), dt * c0, dt * dt * c1)
    } else {
        let c0 = -(-x).exp_m1() / lam;
        ((-x).exp(), c0, (dt - c0) / lam)
    }
}

/// `x(t) + c·∫x + Σ a_m h_m(t)` at every evaluation time.
fn evolve(history: &LoadHistory, modes: &ModeSet, t_eval: &[f64]) -> Vec<f64> {
    let linear = history.interpolation == Interpolation::PiecewiseLinear;
    let mut h = vec![0.0; modes.len()];
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(t_eval.len());
    let mut t = 0.0;
    let mut seg = 0usize;
    let mut x_t = history.values[0];
    let last_seg = history.times.len() - 1;

    let mut advance =
        |to: f64, seg: usize, x_from: f64, h: &mut [f64], integral: &mut f64| -> f64 {
            let dt = to - t;
            let x_to = if linear {
                history.segment_value(seg, to)
            } else {
                x_from
            };
            if dt > 0.0 {
                let slope = (x_to - x_from) / dt;
                for ((hm, &lam), _) in h.iter_mut().zip(&modes.rates).zip(&modes.amplitudes) {
                    let (decay, c0, c1) = weights(lam, dt);
                    *hm = decay * *hm + c0 * x_from + c1 * slope;
                }
                *integral += 0.5 * dt * (x_from + x_to);
                t = to;
            }
            x_to
        };

    for &te in t_eval {
        // walk whole segments up to te
        while seg < last_seg && history.times[seg + 1] <= te {
            let next = history.times[seg + 1];
            advance(next, seg, x_t, &mut h, &mut integral);
            seg += 1;
            x_t = history.values[seg];
        }
        let x_te = if seg < last_seg {
            advance(te, seg, x_t, &mut h, &mut integral)
        } else {
            x_t
        };
        x_t = x_te;
        let memory: f64 = modes
            .amplitudes
            .iter()
            .zip(&h)
            .rev()
            .map(|(a, hm)| a * hm)
            .sum();
        let instantaneous = if seg < last_seg {
            history.segment_value(seg, te)
        } else {
            x_te
        };
        out.push(instantaneous + modes.constant * integral + memory);
    }
    out
}

fn check_eval(history: &LoadHistory, t_eval: &[f64]) -> Result<(), HereditaryError> {
    if t_eval.is_empty() {
        return Err(HereditaryError::InvalidEvalGrid(
            "no evaluation times".into(),
        ));
    }
    if t_eval.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(HereditaryError::InvalidEvalGrid(
            "times must be finite and >= 0".into(),
        ));
    }
    if t_eval.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HereditaryError::InvalidEvalGrid(
            "times must be strictly increasing".into(),
        ));
    }
    let end = history.end_time();
    if let Some(&t) = t_eval.iter().find(|&&t| t > end) {
        return Err(HereditaryError::Extrapolation { t, end });
    }
    Ok(())
}

/// Explicit terms needed to resolve the kernel at the smallest positive
/// evaluation time and at the shortest history interval that can influence
/// the evaluation times. Faster modes are lumped into the tail mode.
fn mode_count(
    model: &mut BesselModel,
    kind: CurveKind,
    history: &LoadHistory,
    t_eval: &[f64],
) -> Result<usize, SeriesError> {
    let t_last = *t_eval.last().unwrap();
    let shortest = history
        .times
        .windows(2)
        .take_while(|w| w[0] < t_last)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let min_time = model.policy().min_time();
    let mut n = 1;
    for t in [
        t_eval.iter().copied().find(|&t| t > 0.0),
        shortest.is_finite().then_some(shortest),
    ]
    .into_iter()
    .flatten()
    {
        n = n.max(model.series(kind, t.max(min_time))?.terms);
    }
    Ok(n)
}

fn respond(
    model: &mut BesselModel,
    input: &LoadHistory,
    t_eval: &[f64],
    strain: bool,
) -> Result<MaterialCurve, HereditaryError> {
    check_eval(input, t_eval)?;
    let order = model.order();
    let remainder = model.policy().remainder();
    let (kind, modes) = if strain {
        let n = mode_count(model, CurveKind::CreepCompliance, input, t_eval)?;
        (
            CurveKind::StrainResponse,
            creep_modes(order, model.zeros_nu2(), n, remainder)?,
        )
    } else {
        let n = mode_count(model, CurveKind::RelaxModulus, input, t_eval)?;
        (
            CurveKind::StressResponse,
            relax_modes(order, model.zeros_nu(), n, remainder)?,
        )
    };
    let values = evolve(input, &modes, t_eval);
    Ok(MaterialCurve {
        order,
        kind,
        samples: t_eval
            .iter()
            .zip(values)
            .map(|(&t, value)| Sample {
                t,
                value,
                provenance: Provenance::Series,
            })
            .collect(),
    })
}

pub fn strain_response_with(
    model: &mut BesselModel,
    stress: &LoadHistory,
    t_eval: &[f64],
) -> Result<MaterialCurve, HereditaryError> {
    respond(model, stress, t_eval, true)
}

pub fn stress_response_with(
    model: &mut BesselModel,
    strain: &LoadHistory,
    t_eval: &[f64],
) -> Result<MaterialCurve, HereditaryError> {
    respond(model, strain, t_eval, false)
}

/// Strain `ε(t)` produced by the stress history.
pub fn strain_response(
    order: Order,
    stress: &LoadHistory,
    t_eval: &[f64],
    policy: &SeriesPolicy,
) -> Result<MaterialCurve, HereditaryError> {
    let mut model = BesselModel::new(order, *policy)?;
    strain_response_with(&mut model, stress, t_eval)
}

/// Stress `σ(t)` produced by the strain history.
pub fn stress_response(
    order: Order,
    strain: &LoadHistory,
    t_eval: &[f64],
    policy: &SeriesPolicy,
) -> Result<MaterialCurve, HereditaryError> {
    let mut model = BesselModel::new(order, *policy)?;
    stress_response_with(&mut model, strain, t_eval)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrip {
    pub steps: usize,
    pub times: Vec<f64>,
    /// Stress recovered from the creep strain of a unit stress step.
    pub recovered: Vec<f64>,
    /// Largest `|recovered - 1|` over `[check_from, t_end]`.
    pub max_error: f64,
}

/// Unit stress step → strain on a uniform grid of `steps` intervals on
/// `[0, t_end]` → stress again, compared with 1 on `[check_from, t_end]`.
pub fn round_trip_step(
    model: &mut BesselModel,
    t_end: f64,
    steps: usize,
    interpolation: Interpolation,
    check_from: f64,
) -> Result<RoundTrip, HereditaryError> {
    let grid: Vec<f64> = (0..=steps)
        .map(|k| t_end * k as f64 / steps as f64)
        .collect();
    let step = LoadHistory::unit_step(t_end)?;
    let strain = strain_response_with(model, &step, &grid)?;
    let strain_hist = LoadHistory::new(grid.clone(), strain.values(), interpolation)?;
    let stress = stress_response_with(model, &strain_hist, &grid)?;
    let max_error = stress
        .samples
        .iter()
        .filter(|s| s.t >= check_from)
        .map(|s| (s.value - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(RoundTrip {
        steps,
        times: grid,
        recovered: stress.values(),
        max_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ord(nu: f64) -> Order {
        Order::new(nu).unwrap()
    }

    #[test]
    fn history_validation() {
        let lin = Interpolation::PiecewiseLinear;
        assert!(LoadHistory::new(vec![0.0, 1.0], vec![1.0], lin).is_err());
        assert!(LoadHistory::new(vec![0.1, 1.0], vec![1.0, 1.0], lin).is_err());
        assert!(LoadHistory::new(vec![0.0, 1.0, 1.0], vec![1.0; 3], lin).is_err());
        assert!(LoadHistory::new(vec![0.0], vec![1.0], lin).is_err());
        let h = LoadHistory::new(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 2.0], lin).unwrap();
        assert_eq!(h.value_at(0.5), 1.0);
        assert_eq!(h.value_at(2.0), 2.0);
        let c = LoadHistory::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 2.0, 3.0],
            Interpolation::PiecewiseConstant,
        )
        .unwrap();
        assert_eq!(c.value_at(0.5), 0.0);
        assert_eq!(c.value_at(1.5), 2.0);
    }

    #[test]
    fn csv_ingestion() {
        let text = "time,value\n0,0\n0.5, 1\n1.0,1\n";
        let h = LoadHistory::from_csv(text.as_bytes(), Interpolation::PiecewiseLinear).unwrap();
        assert_eq!(h.times(), &[0.0, 0.5, 1.0]);
        assert!(LoadHistory::from_csv(
            "time,value\n0,x\n".as_bytes(),
            Interpolation::PiecewiseLinear
        )
        .is_err());
    }

    #[test]
    fn exact_weights_match_series_branch() {
        for &dt in &[0.099, 0.1, 0.101] {
            let (_, c0, c1) = weights(1.0, dt);
            let e0 = -(-dt).exp_m1();
            let e1 = dt - e0;
            assert!((c0 - e0).abs() < 1e-16);
            assert!((c1 - e1).abs() < 1e-15 * e1);
        }
    }

    #[test]
    fn step_responses_are_material_functions() {
        let p = SeriesPolicy::default();
        let t_eval = [0.0, 0.01, 0.1, 0.5, 1.0, 2.0];
        for &nu in &[-0.5, 0.0, 1.0] {
            let mut m = BesselModel::new(ord(nu), p).unwrap();
            let step = LoadHistory::unit_step(2.0).unwrap();
            let eps = strain_response_with(&mut m, &step, &t_eval).unwrap();
            let sig = stress_response_with(&mut m, &step, &t_eval).unwrap();
            for (k, &t) in t_eval.iter().enumerate() {
                let j = m.creep_compliance(t).unwrap();
                let g = m.relaxation_modulus(t).unwrap();
                assert!(
                    (eps.samples[k].value - j).abs() < 1e-10 * j,
                    "nu {nu} t {t}"
                );
                assert!((sig.samples[k].value - g).abs() < 1e-10, "nu {nu} t {t}");
            }
        }
    }

    #[test]
    fn ramp_stress_reference() {
        // ε(t) = 1 + ∫_0^t (𝒥 - 1) for σ = t; mpmath quadrature of the series
        let p = SeriesPolicy::default();
        let ramp = LoadHistory::new(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            Interpolation::PiecewiseLinear,
        )
        .unwrap();
        let c = strain_response(ord(0.0), &ramp, &[0.5, 1.0], &p).unwrap();
        assert!((c.samples[1].value - 5.326_388_888_888_909_088_234_968_326_62).abs() < 1e-8);
        assert!((c.samples[0].value - 1.659_722_232_999_584_913_294_169_045_94).abs() < 1e-8);
    }

    #[test]
    fn sinusoidal_strain_reference() {
        let p = SeriesPolicy::default();
        let t_eval = [0.1, 0.25, 0.5, 0.75, 1.0];
        let expected = [
            0.250_484_284_067_018_704_63,
            0.156_145_902_079_355_168_94,
            -0.308_619_115_792_996_502_49,
            -0.179_670_562_402_088_127_62,
            0.306_624_211_038_494_365_19,
        ];
        let h = LoadHistory::from_fn(1.0, 4000, Interpolation::PiecewiseLinear, |t| {
            (2.0 * PI * t).sin()
        })
        .unwrap();
        let c = stress_response(ord(0.5), &h, &t_eval, &p).unwrap();
        for (got, want) in c.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn linear_in_the_input() {
        let p = SeriesPolicy::default();
        let a = LoadHistory::from_fn(2.0, 50, Interpolation::PiecewiseLinear, |t| t * t).unwrap();
        let b = LoadHistory::from_fn(2.0, 50, Interpolation::PiecewiseLinear, |t| (3.0 * t).cos())
            .unwrap();
        let sum = LoadHistory::new(
            a.times().to_vec(),
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| 2.0 * x - 0.5 * y)
                .collect(),
            Interpolation::PiecewiseLinear,
        )
        .unwrap();
        let t_eval = [0.05, 0.7, 2.0];
        let ra = strain_response(ord(1.0), &a, &t_eval, &p).unwrap().values();
        let rb = strain_response(ord(1.0), &b, &t_eval, &p).unwrap().values();
        let rs = strain_response(ord(1.0), &sum, &t_eval, &p)
            .unwrap()
            .values();
        for k in 0..3 {
            let want = 2.0 * ra[k] - 0.5 * rb[k];
            assert!((rs[k] - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn future_samples_do_not_matter() {
        let p = SeriesPolicy::default();
        let full = LoadHistory::from_fn(2.0, 40, Interpolation::PiecewiseConstant, |t| {
            (5.0 * t).sin()
        })
        .unwrap();
        let cut = LoadHistory::new(
            full.times()[..21].to_vec(),
            full.values()[..21].to_vec(),
            Interpolation::PiecewiseConstant,
        )
        .unwrap();
        let t_eval = [0.3, 0.95, 1.0];
        let a = stress_response(ord(0.0), &full, &t_eval, &p)
            .unwrap()
            .values();
        let b = stress_response(ord(0.0), &cut, &t_eval, &p)
            .unwrap()
            .values();
        assert_eq!(a[..2], b[..2]);
    }

    #[test]
    fn round_trip_converges() {
        let mut m = BesselModel::new(ord(0.0), SeriesPolicy::default()).unwrap();
        let lin = Interpolation::PiecewiseLinear;
        let e1 = round_trip_step(&mut m, 2.0, 200, lin, 0.1)
            .unwrap()
            .max_error;
        let e2 = round_trip_step(&mut m, 2.0, 400, lin, 0.1)
            .unwrap()
            .max_error;
        assert!(e1 < 0.02);
        assert!((e1 / e2).log2() > 1.4);
        // first order when held constant
        let c1 = round_trip_step(&mut m, 2.0, 200, Interpolation::PiecewiseConstant, 0.1)
            .unwrap()
            .max_error;
        let c2 = round_trip_step(&mut m, 2.0, 400, Interpolation::PiecewiseConstant, 0.1)
            .unwrap()
            .max_error;
        assert!((c1 / c2).log2() > 0.9);
    }

    #[test]
    fn zero_input_gives_zero() {
        let h = LoadHistory::new(
            vec![0.0, 1.0],
            vec![0.0, 0.0],
            Interpolation::PiecewiseConstant,
        )
        .unwrap();
        let c = stress_response(ord(0.5), &h, &[0.3, 1.0], &SeriesPolicy::default()).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_extrapolation() {
        let h = LoadHistory::unit_step(1.0).unwrap();
        let err = strain_response(ord(0.0), &h, &[0.5, 1.5], &SeriesPolicy::default()).unwrap_err();
        assert_eq!(err, HereditaryError::Extrapolation { t: 1.5, end: 1.0 });
    }
}
