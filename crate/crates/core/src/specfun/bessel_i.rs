use std::f64::consts::PI;

use super::{recip_gamma, EvalAccuracy, SpecFunError};

/// Arguments at or above this (and above ν²) use the large-argument expansion.
const ASYMPTOTIC_CROSSOVER: f64 = 30.0;
const CF_MAX_ITER: usize = 200_000;
const LN_MAX: f64 = 709.78;

fn use_asymptotic(nu: f64, z: f64) -> bool {
    z >= ASYMPTOTIC_CROSSOVER && z >= nu * nu
}

/// `Σ_k (-1)^k a_k(ν) / z^k`, the bracket of the large-argument expansion
/// `I_ν(z) ~ e^z / sqrt(2πz) · Σ_k (-1)^k a_k(ν) / z^k`.
pub(crate) fn hankel_sum(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev_abs = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * z);
        let abs = term.abs();
        if abs >= prev_abs {
            break;
        }
        sum += term;
        if abs <= 1e-17 * sum.abs() {
            break;
        }
        prev_abs = abs;
    }
    sum
}

fn series(nu: f64, z: f64, acc: &EvalAccuracy) -> Result<f64, SpecFunError> {
    let half = 0.5 * z;
    let q = half * half;
    // (z/2)^ν / Γ(ν+1), in log space when ν is large
    let mut term = if nu > 100.0 {
        (nu * half.ln() - super::ln_gamma(nu + 1.0)?).exp()
    } else {
        half.powf(nu) * recip_gamma(nu + 1.0)
    };
    let mut sum = term;
    let stop = acc.rel_tol() * 1e-4;
    for k in 1..=acc.max_terms() {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term <= stop * sum {
            return Ok(sum);
        }
    }
    Err(SpecFunError::NotConverged {
        what: "modified Bessel power series",
        iterations: acc.max_terms(),
    })
}

fn asymptotic(nu: f64, z: f64) -> Result<f64, SpecFunError> {
    let s = hankel_sum(nu, z);
    let log_mag = z - 0.5 * (2.0 * PI * z).ln() + s.ln();
    if log_mag > LN_MAX {
        return Err(SpecFunError::Overflow {
            log_magnitude: log_mag,
        });
    }
    let half = (0.5 * z).exp();
    Ok(half * half * s / (2.0 * PI * z).sqrt())
}

/// Modified Bessel function of the first kind `I_ν(z)`, `ν >= -1`, `z > 0`.
///
/// Power series below `z = max(30, ν²)`, full large-argument expansion above.
/// Returns an overflow error once `I_ν(z)` is not representable; use
/// [`bessel_i_ratio`] for large arguments.
pub fn bessel_i(nu: f64, z: f64, acc: &EvalAccuracy) -> Result<f64, SpecFunError> {
    if !(nu >= -1.0) || !nu.is_finite() {
        return Err(SpecFunError::InvalidOrder(nu));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(SpecFunError::InvalidArgument(format!(
            "bessel_i requires z > 0, got {z}"
        )));
    }
    // I_{-1} = I_1
    let nu = if nu == -1.0 { 1.0 } else { nu };
    if use_asymptotic(nu, z) {
        asymptotic(nu, z)
    } else {
        series(nu, z, acc)
    }
}

/// `I_{μ+1}(z) / I_μ(z)` for `μ > -1`, `z > 0`; never overflows.
///
/// Continued fraction `1/(2(μ+1)/z + 1/(2(μ+2)/z + ...))` (modified Lentz)
/// for moderate `z`, quotient of the large-argument expansions otherwise.
pub(crate) fn ratio_next(mu: f64, z: f64) -> Result<f64, SpecFunError> {
    if use_asymptotic(mu + 1.0, z) {
        return Ok(hankel_sum(mu + 1.0, z) / hankel_sum(mu, z));
    }
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..=CF_MAX_ITER {
        let b = 2.0 * (mu + k as f64) / z;
        d += b;
        if d == 0.0 {
            d = TINY;
        }
        d = 1.0 / d;
        c = b + 1.0 / c;
        if c == 0.0 {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(f);
        }
    }
    Err(SpecFunError::NotConverged {
        what: "Bessel ratio continued fraction",
        iterations: CF_MAX_ITER,
    })
}

/// `I_a(z) / I_b(z)` for contiguous orders `|a - b| = 1`, `min(a, b) >= -1`.
pub fn bessel_i_ratio(order_num: f64, order_den: f64, z: f64) -> Result<f64, SpecFunError> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(SpecFunError::InvalidArgument(format!(
            "bessel_i_ratio requires z > 0, got {z}"
        )));
    }
    let lower = order_num.min(order_den);
    if !(lower >= -1.0) || !lower.is_finite() {
        return Err(SpecFunError::InvalidOrder(lower));
    }
    if ((order_num - order_den).abs() - 1.0).abs() > 1e-12 {
        return Err(SpecFunError::InvalidArgument(format!(
            "orders must be contiguous, got {order_num} and {order_den}"
        )));
    }
    // I_{-1} = I_1, so I_0 / I_{-1} = 1 / r(0)
    let r = if lower == -1.0 {
        1.0 / ratio_next(0.0, z)?
    } else {
        ratio_next(lower, z)?
    };
    if order_num > order_den {
        Ok(r)
    } else {
        Ok(1.0 / r)
    }
}
