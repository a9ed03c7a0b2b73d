//! Positive zeros `j_{ν,n}` of `J_ν` and the Rayleigh sum `Σ 1/j² = 1/(4(ν+1))`.
//!
//! Zeros are found one at a time: a unit-step scan from the previous zero
//! brackets the next sign change, and a Newton iteration started from the
//! McMahon estimate refines it, falling back to bisection whenever a step
//! leaves the bracket.
//!
//! Tables are memoized per `(ν, abs_tol)`. Each zero only depends on the one
//! before it, so a longer table always extends a shorter one bit for bit and
//! requests for fewer zeros are served from the prefix.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::specfun::{j_and_deriv, Order, SpecFunError};

const NEWTON_MAX_ITER: usize = 100;
const SCAN_STEP: f64 = 1.0;
const MAX_SCAN_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroError {
    #[error("zero count must be at least 1")]
    EmptyRequest,
    #[error("abs_tol must lie in (0, 1e-6], got {0}")]
    InvalidTolerance(f64),
    #[error("zero {n} of J_{nu} did not converge within {iterations} iterations")]
    NotConverged {
        nu: f64,
        n: usize,
        iterations: usize,
    },
    #[error("no sign change found while bracketing zero {n} of J_{nu}")]
    NoBracket { nu: f64, n: usize },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// First `len` positive zeros of `J_ν`, strictly increasing.
#[derive(Debug, Clone)]
pub struct ZeroTable {
    order: Order,
    zeros: Arc<Vec<f64>>,
    len: usize,
    abs_tol: f64,
}

impl ZeroTable {
    pub fn order(&self) -> Order {
        self.order
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Requested accuracy of each entry.
    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    /// Accuracy actually certified for a zero at `j`: the requested tolerance,
    /// floored at a few ulps of `j`.
    pub fn effective_tol(&self, j: f64) -> f64 {
        effective_tol(self.abs_tol, j)
    }

    /// n-th zero, 1-based.
    pub fn get(&self, n: usize) -> Option<f64> {
        if n == 0 {
            None
        } else {
            self.zeros().get(n - 1).copied()
        }
    }

    pub fn first(&self) -> f64 {
        self.zeros[0]
    }

    /// Prefix with `count` entries (or the whole table if it is shorter).
    pub fn truncated(&self, count: usize) -> ZeroTable {
        ZeroTable {
            len: count.min(self.len),
            ..self.clone()
        }
    }
}

impl PartialEq for ZeroTable {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.abs_tol == other.abs_tol && self.zeros() == other.zeros()
    }
}

fn effective_tol(abs_tol: f64, j: f64) -> f64 {
    abs_tol.max(8.0 * f64::EPSILON * j)
}

type CacheKey = (i64, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cache_key(nu: f64, abs_tol: f64) -> CacheKey {
    ((nu * 1e14).round() as i64, abs_tol.to_bits())
}

/// First `count` positive zeros of `J_ν`, each refined until
/// `|J_ν(j)| ≤ tol · |J'_ν(j)|`.
pub fn compute_zeros(nu: f64, count: usize, abs_tol: f64) -> Result<ZeroTable, ZeroError> {
    let order = Order::new(nu)?;
    if count == 0 {
        return Err(ZeroError::EmptyRequest);
    }
    if !(abs_tol > 0.0 && abs_tol <= 1e-6) {
        return Err(ZeroError::InvalidTolerance(abs_tol));
    }
    let key = cache_key(nu, abs_tol);
    let cached = cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .get(&key)
        .cloned();

    let zeros = match cached {
        Some(z) if z.len() >= count => z,
        prefix => {
            let mut zs = prefix.map(|z| z.as_ref().clone()).unwrap_or_default();
            zs.reserve(count - zs.len());
            while zs.len() < count {
                let next = next_zero(nu, zs.len() + 1, zs.last().copied(), abs_tol)?;
                zs.push(next);
            }
            let zs = Arc::new(zs);
            let mut guard = cache().lock().unwrap_or_else(|e| e.into_inner());
            let entry = guard.entry(key).or_insert_with(|| zs.clone());
            if entry.len() < zs.len() {
                *entry = zs.clone();
            }
            zs
        }
    };
    Ok(ZeroTable {
        order,
        zeros,
        len: count,
        abs_tol,
    })
}

/// McMahon's large-n expansion of `j_{ν,n}`.
pub fn mcmahon(nu: f64, n: usize) -> f64 {
    let mu = 4.0 * nu * nu;
    let beta = (n as f64 + 0.5 * nu - 0.25) * PI;
    let b8 = 8.0 * beta;
    let b8_2 = b8 * b8;
    beta - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 * b8_2)
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8 * b8_2 * b8_2)
}

fn next_zero(nu: f64, n: usize, prev: Option<f64>, abs_tol: f64) -> Result<f64, ZeroError> {
    // sign of J_ν just before the n-th zero
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let mut lo = match prev {
        Some(p) => p + SCAN_STEP,
        None => (2.0 * (nu + 1.0).sqrt()).max(nu),
    };
    let (f_lo, _) = j_and_deriv(nu, lo)?;
    if f_lo * sign <= 0.0 {
        // only possible if a zero sits exactly on the start point
        if f_lo == 0.0 {
            return Ok(lo);
        }
        return Err(ZeroError::NoBracket { nu, n });
    }
    let mut hi = lo;
    let mut found = false;
    for _ in 0..MAX_SCAN_STEPS {
        hi = lo + SCAN_STEP;
        let (f_hi, _) = j_and_deriv(nu, hi)?;
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_hi * sign < 0.0 {
            found = true;
            break;
        }
        lo = hi;
    }
    if !found {
        return Err(ZeroError::NoBracket { nu, n });
    }
    refine(nu, n, lo, hi, sign, abs_tol)
}

/// Safeguarded Newton on `[lo, hi]` where `sign·J > 0` at `lo` and `< 0` at `hi`.
fn refine(
    nu: f64,
    n: usize,
    mut lo: f64,
    mut hi: f64,
    sign: f64,
    abs_tol: f64,
) -> Result<f64, ZeroError> {
    let guess = mcmahon(nu, n);
    let mut x = if guess > lo && guess < hi {
        guess
    } else {
        0.5 * (lo + hi)
    };
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    let (mut f, mut df) = j_and_deriv(nu, x)?;
    for _ in 0..NEWTON_MAX_ITER {
        let tol = effective_tol(abs_tol, x);
        if f == 0.0 {
            return Ok(x);
        }
        let newton_ok = df != 0.0 && {
            let step_to = x - f / df;
            step_to > lo && step_to < hi && (2.0 * f).abs() <= (dx_old * df).abs()
        };
        dx_old = dx;
        if newton_ok {
            dx = f / df;
            x -= dx;
        } else {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        }
        if dx.abs() < tol || hi - lo < tol {
            return Ok(polish(nu, x, lo, hi));
        }
        let fd = j_and_deriv(nu, x)?;
        f = fd.0;
        df = fd.1;
        if f * sign > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    Err(ZeroError::NotConverged {
        nu,
        n,
        iterations: NEWTON_MAX_ITER,
    })
}

// One more Newton step: after a bisection exit the error can still be ~tol.
fn polish(nu: f64, x: f64, lo: f64, hi: f64) -> f64 {
    match j_and_deriv(nu, x) {
        Ok((f, df)) if df != 0.0 => {
            let y = x - f / df;
            if y >= lo && y <= hi {
                y
            } else {
                x
            }
        }
        _ => x,
    }
}

/// How the part of `Σ 1/j²` beyond the table is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailModel {
    /// No correction: the plain truncated sum.
    None,
    /// `j_n ≈ (n + ν/2 - 1/4)π`.
    OneTerm,
    /// Adds the `-(4ν²-1)/(8β)` McMahon correction to the zero locations.
    #[default]
    TwoTerm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighSum {
    pub partial: f64,
    pub tail: f64,
    pub corrected: f64,
    pub terms: usize,
}

/// `Σ 1/j_{ν,n}²` over the table plus the default two-term tail estimate.
pub fn rayleigh_sum(table: &ZeroTable) -> RayleighSum {
    rayleigh_sum_with(table, TailModel::default())
}

pub fn rayleigh_sum_with(table: &ZeroTable, model: TailModel) -> RayleighSum {
    // add small terms first
    let partial: f64 = table.zeros().iter().rev().map(|j| 1.0 / (j * j)).sum();
    let tail = rayleigh_tail(table.order().value(), table.len(), model);
    RayleighSum {
        partial,
        tail,
        corrected: partial + tail,
        terms: table.len(),
    }
}

/// Estimate of `Σ_{n>N} 1/j_{ν,n}²`.
pub fn rayleigh_tail(nu: f64, n_terms: usize, model: TailModel) -> f64 {
    let a = n_terms as f64 + 1.0 + 0.5 * nu - 0.25;
    let pi2 = PI * PI;
    match model {
        TailModel::None => 0.0,
        TailModel::OneTerm => hurwitz_zeta(2.0, a) / pi2,
        TailModel::TwoTerm => {
            hurwitz_zeta(2.0, a) / pi2
                + (4.0 * nu * nu - 1.0) / (4.0 * pi2 * pi2) * hurwitz_zeta(4.0, a)
        }
    }
}

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (k+a)^{-s}` for `s > 1`, `a > 0`,
/// by Euler-Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    // B_2k / (2k)!
    const B2K_FACT: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
    ];
    let m = 12usize;
    let mut sum = 0.0;
    for k in 0..m {
        sum += (a + k as f64).powf(-s);
    }
    let x = a + m as f64;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // s(s+1)...(s+2k-2) x^{-s-2k+1}
    let mut rising = s;
    let mut xp = x.powf(-s - 1.0);
    let x2 = x * x;
    for (k, c) in B2K_FACT.iter().enumerate() {
        let term = c * rising * xp;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let kk = (2 * k + 1) as f64;
        rising *= (s + kk) * (s + kk + 1.0);
        xp /= x2;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_j, EvalAccuracy};

    #[test]
    fn half_integer_orders() {
        let t = compute_zeros(0.5, 3, 1e-12).unwrap();
        for (k, &j) in t.zeros().iter().enumerate() {
            assert!((j - (k + 1) as f64 * PI).abs() < 1e-12);
        }
        let t = compute_zeros(-0.5, 2, 1e-12).unwrap();
        assert!((t.zeros()[0] - 0.5 * PI).abs() < 1e-12);
        assert!((t.zeros()[1] - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn first_zeros_reference() {
        // mpmath
        let cases = [
            (0.0, 2.404_825_557_695_772_768_621_631_879),
            (1.0, 3.831_705_970_207_512_315_614_435_886),
            (2.0, 5.135_622_301_840_682_556_301_401_690),
            (3.0, 6.380_161_895_923_983_506_236_614_642),
        ];
        for (nu, expected) in cases {
            let j = compute_zeros(nu, 1, 1e-14).unwrap().first();
            assert!((j - expected).abs() < 1e-13, "nu {nu}: {j}");
        }
    }

    #[test]
    fn residual_bound_holds() {
        let acc = EvalAccuracy::default();
        for &nu in &[-0.9, -0.5, 0.0, 0.3, 1.0, 2.7, 12.0, 52.0] {
            let t = compute_zeros(nu, 200, 1e-12).unwrap();
            for &j in t.zeros() {
                let f = bessel_j(nu, j, &acc).unwrap();
                let (_, df) = j_and_deriv(nu, j).unwrap();
                // one J evaluation contributes ~1e-15 of the envelope
                assert!(
                    f.abs() <= t.effective_tol(j) * df.abs() + 4e-15 * (2.0 / (PI * j)).sqrt(),
                    "nu {nu} j {j}: J = {f:e}"
                );
            }
        }
    }

    #[test]
    fn gaps_approach_pi() {
        for &nu in &[-0.7, 0.0, 1.0, 2.7] {
            let t = compute_zeros(nu, 300, 1e-12).unwrap();
            let z = t.zeros();
            let dev: Vec<f64> = z.windows(2).map(|w| (w[1] - w[0] - PI).abs()).collect();
            for k in 10..dev.len() - 1 {
                assert!(dev[k + 1] <= dev[k] + 1e-13, "nu {nu} k {k}");
            }
        }
    }

    #[test]
    fn interlacing() {
        for &nu in &[-0.5, 0.0, 0.5, 1.0, 2.7] {
            let a = compute_zeros(nu, 100, 1e-12).unwrap();
            let b = compute_zeros(nu + 1.0, 100, 1e-12).unwrap();
            for n in 0..99 {
                assert!(a.zeros()[n] < b.zeros()[n]);
                assert!(b.zeros()[n] < a.zeros()[n + 1]);
            }
        }
    }

    #[test]
    fn prefix_matches_longer_table() {
        let short = compute_zeros(0.37, 5, 1e-11).unwrap();
        let long = compute_zeros(0.37, 40, 1e-11).unwrap();
        assert_eq!(short.zeros(), &long.zeros()[..5]);
        assert_eq!(long.truncated(5), short);
    }

    #[test]
    fn rayleigh_identity() {
        for &nu in &[-0.5, 0.0, 0.5, 1.0, 2.7] {
            let t = compute_zeros(nu, 100, 1e-12).unwrap();
            let r = rayleigh_sum(&t);
            let exact = 0.25 / (nu + 1.0);
            assert!(
                (r.corrected - exact).abs() < 1e-8,
                "nu {nu}: {}",
                r.corrected - exact
            );
            assert!(r.partial < exact);
            let plain = rayleigh_sum_with(&t, TailModel::None);
            assert_eq!(plain.corrected, plain.partial);
        }
    }

    #[test]
    fn hurwitz_zeta_values() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        // ζ(2, 1/2) = π²/2
        assert!((hurwitz_zeta(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-14);
        // ζ(2, 101.25), mpmath
        assert!((hurwitz_zeta(2.0, 101.25) - 0.009_925_476_829_353_893_359_594_5).abs() < 1e-17);
    }

    #[test]
    fn mcmahon_is_close_for_large_n() {
        let t = compute_zeros(1.0, 50, 1e-12).unwrap();
        assert!((mcmahon(1.0, 50) - t.zeros()[49]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(
            compute_zeros(-1.0, 1, 1e-10),
            Err(ZeroError::SpecFun(_))
        ));
        assert_eq!(compute_zeros(0.0, 0, 1e-10), Err(ZeroError::EmptyRequest));
        assert!(compute_zeros(0.0, 1, 1e-5).is_err());
        assert!(compute_zeros(0.0, 1, 0.0).is_err());
    }
}
