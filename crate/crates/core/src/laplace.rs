//! Laplace-domain memory functions and a numerical inversion oracle.
//!
//! `Ψ̃_ν(s) = 2(ν+1)/√s · I_{ν+1}(√s) / I_{ν+2}(√s)` and
//! `Φ̃_ν(s) = 2(ν+1)/√s · I_{ν+1}(√s) / I_ν(√s)`, principal branch of `√s`.
//! Both are single valued with simple poles on the negative real axis, which
//! is what makes a Talbot contour wrapping that axis a valid inversion path.

use num_complex::Complex64;
use thiserror::Error;

use crate::specfun::{hankel_sum, j_and_deriv, ratio_next, Order, SpecFunError};

const CF_MAX_ITER: usize = 100_000;
// squared inside Complex::inv, so keep it well above the underflow limit
const CF_TINY: f64 = 1e-150;
/// Default radius around a pole inside which evaluation is refused.
pub const POLE_EXCLUSION: f64 = 1e-6;
/// Relative disagreement between full and half resolution that flags a
/// Talbot estimate as degraded.
pub const DEGRADED_REL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LaplaceError {
    #[error("s = {re}{im:+}i lies within the exclusion radius of the pole at {pole}")]
    Pole { re: f64, im: f64, pole: f64 },
    #[error("s = 0 is not a valid evaluation point")]
    ZeroArgument,
    #[error("s must be positive, got {0}")]
    NonPositive(f64),
    #[error("inversion time must be positive and finite, got {0}")]
    InvalidTime(f64),
    #[error("invalid Talbot configuration: {0}")]
    InvalidConfig(String),
    #[error("complex Bessel ratio did not converge at z = {re}{im:+}i")]
    NotConverged { re: f64, im: f64 },
    #[error("transform returned a non-finite value at s = {re}{im:+}i")]
    NonFinite { re: f64, im: f64 },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// A transform value together with its argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacePoint {
    pub s: Complex64,
    pub value: Complex64,
}

/// `I_{μ+1}(z) / I_μ(z)` for complex `z` with `Re z ≥ 0`.
pub fn complex_ratio(mu: f64, z: Complex64) -> Result<Complex64, LaplaceError> {
    if z.im == 0.0 && z.re > 0.0 {
        return Ok(Complex64::new(ratio_next(mu, z.re)?, 0.0));
    }
    let m = z.norm();
    if z.re >= 20.0 && m >= 30.0 && m >= 2.0 * (mu + 1.0) * (mu + 1.0) {
        return Ok(complex_hankel_sum(mu + 1.0, z) / complex_hankel_sum(mu, z));
    }
    // r_μ = 1 / (2(μ+1)/z + 1 / (2(μ+2)/z + ...)), modified Lentz
    let tiny = Complex64::new(CF_TINY, 0.0);
    let zi = z.inv();
    let mut f = tiny;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..=CF_MAX_ITER {
        let b = zi * (2.0 * (mu + k as f64));
        d += b;
        if d.norm() < CF_TINY {
            d = tiny;
        }
        d = d.inv();
        c = b + c.inv();
        if c.norm() < CF_TINY {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-15 {
            return Ok(f);
        }
    }
    Err(LaplaceError::NotConverged { re: z.re, im: z.im })
}

fn complex_hankel_sum(nu: f64, z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::new(hankel_sum(nu, z.re), 0.0);
    }
    let mu = 4.0 * nu * nu;
    let zi = z.inv();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= zi * (-(mu - odd * odd) / (8.0 * k as f64));
        let a = term.norm();
        if a >= prev {
            break;
        }
        sum += term;
        if a <= 1e-17 * sum.norm() {
            break;
        }
        prev = a;
    }
    sum
}

/// Refuse `s` within `radius` of a zero of `I_μ(√s)`, i.e. of `-j_{μ,n}²`.
fn check_pole(mu: f64, s: Complex64, radius: f64) -> Result<(), LaplaceError> {
    if s.re >= 0.0 || s.im.abs() >= radius {
        return Ok(());
    }
    let y = (-s.re).sqrt();
    let (j, jp) = j_and_deriv(mu, y)?;
    if jp == 0.0 {
        return Ok(());
    }
    // Newton distance to the nearest zero of J_μ, mapped to s = -y²
    let dy = j / jp;
    let pole_y = y - dy;
    let ds = (2.0 * y * dy).abs();
    if ds.hypot(s.im) < radius {
        return Err(LaplaceError::Pole {
            re: s.re,
            im: s.im,
            pole: -pole_y * pole_y,
        });
    }
    Ok(())
}

fn memory_tilde(order: Order, s: Complex64, den_mu_shift: f64) -> Result<Complex64, LaplaceError> {
    if s == Complex64::new(0.0, 0.0) {
        return Err(LaplaceError::ZeroArgument);
    }
    let nu = order.value();
    let scale = 2.0 * (nu + 1.0);
    if s.im == 0.0 && s.re > 0.0 {
        let z = s.re.sqrt();
        let v = if den_mu_shift > 0.0 {
            // I_{ν+1}/I_{ν+2} = 1 / r_{ν+1}
            scale / (z * ratio_next(nu + 1.0, z)?)
        } else {
            scale / z * ratio_next(nu, z)?
        };
        return Ok(Complex64::new(v, 0.0));
    }
    let den_mu = nu + den_mu_shift;
    check_pole(den_mu, s, POLE_EXCLUSION)?;
    let z = s.sqrt();
    let v = if den_mu_shift > 0.0 {
        scale / (z * complex_ratio(nu + 1.0, z)?)
    } else {
        scale / z * complex_ratio(nu, z)?
    };
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(LaplaceError::NonFinite { re: s.re, im: s.im });
    }
    Ok(v)
}

/// `Ψ̃_ν(s)`, the transform of the creep memory function.
pub fn psi_tilde(order: Order, s: Complex64) -> Result<Complex64, LaplaceError> {
    memory_tilde(order, s, 2.0)
}

/// `Φ̃_ν(s)`, the transform of the relaxation memory function.
pub fn phi_tilde(order: Order, s: Complex64) -> Result<Complex64, LaplaceError> {
    memory_tilde(order, s, 0.0)
}

pub fn psi_tilde_real(order: Order, s: f64) -> Result<f64, LaplaceError> {
    if !(s > 0.0) {
        return Err(LaplaceError::NonPositive(s));
    }
    psi_tilde(order, Complex64::new(s, 0.0)).map(|v| v.re)
}

pub fn phi_tilde_real(order: Order, s: f64) -> Result<f64, LaplaceError> {
    if !(s > 0.0) {
        return Err(LaplaceError::NonPositive(s));
    }
    phi_tilde(order, Complex64::new(s, 0.0)).map(|v| v.re)
}

/// `|(1 + Ψ̃_ν(s))(1 - Φ̃_ν(s)) - 1|` for real `s > 0`.
pub fn check_reciprocity(order: Order, s: f64) -> Result<f64, LaplaceError> {
    let psi = psi_tilde_real(order, s)?;
    let phi = phi_tilde_real(order, s)?;
    Ok(((1.0 + psi) * (1.0 - phi) - 1.0).abs())
}

/// `Σ 1/j_{ν,n}⁸`, closed form.
pub fn rayleigh_sigma4(nu: f64) -> f64 {
    let a = nu + 1.0;
    (5.0 * nu + 11.0) / (256.0 * a.powi(4) * (nu + 2.0).powi(2) * (nu + 3.0) * (nu + 4.0))
}

/// A lower bound on `j_{ν,1}²` that does not need the zeros: `σ₄^{-1/4}`.
pub fn first_rate_lower_bound(nu: f64) -> f64 {
    rayleigh_sigma4(nu).powf(-0.25)
}

/// Fixed-Talbot quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalbotConfig {
    node_count: usize,
    contour_scale: Option<f64>,
    shift: f64,
}

impl TalbotConfig {
    pub fn new(node_count: usize) -> Result<Self, LaplaceError> {
        if node_count < 16 || node_count % 2 != 0 {
            return Err(LaplaceError::InvalidConfig(format!(
                "node_count must be even and at least 16, got {node_count}"
            )));
        }
        Ok(TalbotConfig {
            node_count,
            contour_scale: None,
            shift: 0.0,
        })
    }

    /// Fixes the contour scale `r` instead of the default `2M/(5t)`.
    pub fn with_contour_scale(mut self, r: f64) -> Result<Self, LaplaceError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(LaplaceError::InvalidConfig(format!(
                "contour_scale must be positive, got {r}"
            )));
        }
        self.contour_scale = Some(r);
        Ok(self)
    }

    /// Inverts `F(s - c)` and multiplies by `e^{-ct}`. A shift just below the
    /// slowest decay rate keeps exponentially small targets at full relative
    /// accuracy.
    pub fn with_shift(mut self, c: f64) -> Result<Self, LaplaceError> {
        if !c.is_finite() {
            return Err(LaplaceError::InvalidConfig(format!(
                "shift must be finite, got {c}"
            )));
        }
        self.shift = c;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn contour_scale(&self, t: f64) -> f64 {
        self.contour_scale
            .unwrap_or(2.0 * self.node_count as f64 / (5.0 * t))
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }
}

impl Default for TalbotConfig {
    fn default() -> Self {
        TalbotConfig {
            node_count: 48,
            contour_scale: None,
            shift: 0.0,
        }
    }
}

/// Result of a Talbot inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalbotEstimate {
    pub value: f64,
    /// Same quadrature with half the nodes.
    pub half_resolution: f64,
    /// Set when the two estimates differ by more than `DEGRADED_REL` relative.
    pub degraded: bool,
}

impl TalbotEstimate {
    pub fn rel_disagreement(&self) -> f64 {
        ((self.value - self.half_resolution) / self.value).abs()
    }
}

fn talbot_sum<F>(f: &F, t: f64, m: usize, r: f64, shift: f64) -> Result<f64, LaplaceError>
where
    F: Fn(Complex64) -> Result<Complex64, LaplaceError>,
{
    let mf = m as f64;
    let f0 = f(Complex64::new(r - shift, 0.0))?;
    let mut acc = 0.5 * f0.re * (r * t).exp();
    for k in 1..m {
        let theta = k as f64 * std::f64::consts::PI / mf;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let fs = f(s - shift)?;
        if !(fs.re.is_finite() && fs.im.is_finite()) {
            return Err(LaplaceError::NonFinite { re: s.re, im: s.im });
        }
        acc += ((s * t).exp() * fs * Complex64::new(1.0, sigma)).re;
    }
    Ok(r / mf * acc * (-shift * t).exp())
}

/// Inverse Laplace transform of `f` at time `t` by fixed-Talbot quadrature.
pub fn invert_numeric<F>(f: F, t: f64, cfg: &TalbotConfig) -> Result<TalbotEstimate, LaplaceError>
where
    F: Fn(Complex64) -> Result<Complex64, LaplaceError>,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(LaplaceError::InvalidTime(t));
    }
    let m = cfg.node_count();
    let value = talbot_sum(&f, t, m, cfg.contour_scale(t), cfg.shift())?;
    let half_cfg = TalbotConfig {
        node_count: m / 2,
        ..*cfg
    };
    let half_resolution = talbot_sum(&f, t, m / 2, half_cfg.contour_scale(t), cfg.shift())?;
    let degraded = (value - half_resolution).abs() > DEGRADED_REL * value.abs();
    Ok(TalbotEstimate {
        value,
        half_resolution,
        degraded,
    })
}

/// Talbot estimate of `Ψ_ν(t)`.
pub fn invert_psi(
    order: Order,
    t: f64,
    cfg: &TalbotConfig,
) -> Result<TalbotEstimate, LaplaceError> {
    invert_numeric(|s| psi_tilde(order, s), t, cfg)
}

/// Talbot estimate of `Φ_ν(t)`. Unless the config already carries a shift,
/// the contour is shifted by `first_rate_lower_bound(ν)` so that the
/// exponential decay of `Φ` does not eat the relative accuracy.
pub fn invert_phi(
    order: Order,
    t: f64,
    cfg: &TalbotConfig,
) -> Result<TalbotEstimate, LaplaceError> {
    let cfg = if cfg.shift() == 0.0 {
        cfg.with_shift(first_rate_lower_bound(order.value()))?
    } else {
        *cfg
    };
    invert_numeric(|s| phi_tilde(order, s), t, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(nu: f64) -> Order {
        Order::new(nu).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn psi_tilde_reference() {
        // mpmath: 2·2/2 · I_2(2)/I_3(2)
        let v = psi_tilde_real(ord(1.0), 4.0).unwrap();
        assert!((v - 6.476_906_831_800_099_700_832_384_093_8).abs() < 1e-12 * v);
    }

    #[test]
    fn phi_tilde_reference() {
        let v = phi_tilde_real(ord(0.0), 1.0).unwrap();
        assert!((v - 0.892_779_931_793_069_014_095_363_590_385).abs() < 1e-13);
    }

    #[test]
    fn half_integer_closed_forms() {
        for &s in &[0.01, 0.3, 1.0, 10.0, 400.0, 1e5] {
            let z: f64 = f64::sqrt(s);
            let phi = phi_tilde_real(ord(-0.5), s).unwrap();
            assert!((phi - z.tanh() / z).abs() < 1e-13 * phi.max(1e-300));
            if s < 0.1 {
                // the closed form itself cancels badly here
                continue;
            }
            // I_{3/2}/I_{1/2} = coth z - 1/z and I_{5/2}/I_{3/2} = 1/(coth z - 1/z) - 3/z
            let l = 1.0 / z.tanh() - 1.0 / z;
            let r52 = 1.0 / l - 3.0 / z;
            let psi = psi_tilde_real(ord(0.5), s).unwrap();
            assert!((psi - 3.0 / (z * r52)).abs() < 1e-10 * psi, "s {s}");
        }
    }

    #[test]
    fn residue_at_origin() {
        for &nu in &[-0.5, 0.0, 0.5, 1.0] {
            let v = 1e-10 * psi_tilde_real(ord(nu), 1e-10).unwrap();
            let expected = 4.0 * (nu + 1.0) * (nu + 2.0);
            assert!(((v - expected) / expected).abs() < 1e-8);
        }
    }

    #[test]
    fn large_s_phi_limit() {
        let s = 1e8;
        let v = phi_tilde_real(ord(1.0), s).unwrap();
        assert!((v * s.sqrt() / 4.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn reciprocity_grid() {
        for &nu in &[-0.5, 0.0, 0.5, 1.0] {
            for k in 0..25 {
                let s = 10f64.powf(-3.0 + 9.0 * k as f64 / 24.0);
                let r = check_reciprocity(ord(nu), s).unwrap();
                assert!(r <= 1e-10, "nu {nu} s {s}: {r}");
            }
        }
        assert!(check_reciprocity(ord(0.5), 10.0).unwrap() < 1e-12);
        assert!(check_reciprocity(ord(1.0), 0.0).is_err());
    }

    #[test]
    fn complex_ratio_matches_real_path() {
        for &mu in &[-0.5, 0.0, 1.0, 3.0] {
            for &x in &[0.5, 5.0, 45.0] {
                let real = ratio_next(mu, x).unwrap();
                // nudge off the real axis so the complex branch is used
                let z = Complex64::new(x, 1e-13);
                let cplx = complex_ratio(mu, z).unwrap();
                assert!((cplx.re - real).abs() < 1e-12 * real);
            }
        }
    }

    #[test]
    fn complex_ratio_on_imaginary_axis() {
        // I_{μ+1}(iy)/I_μ(iy) = i J_{μ+1}(y)/J_μ(y); μ = 1/2: J_{3/2}/J_{1/2} = 1/y - cot y
        for &y in &[0.7, 2.0, 7.5, 40.0] {
            let r = complex_ratio(0.5, Complex64::new(0.0, y)).unwrap();
            let expected = 1.0 / y - y.cos() / y.sin();
            assert!(r.re.abs() < 1e-12);
            assert!(
                (r.im - expected).abs() < 1e-11 * expected.abs().max(1.0),
                "y {y}"
            );
        }
    }

    #[test]
    fn pole_exclusion() {
        // Φ̃_{1/2} has poles at -(nπ)²
        let pole = -std::f64::consts::PI.powi(2);
        let err = phi_tilde(ord(0.5), c(pole + 1e-8)).unwrap_err();
        assert!(matches!(err, LaplaceError::Pole { .. }));
        assert!(phi_tilde(ord(0.5), c(pole + 1e-3)).is_ok());
        assert_eq!(psi_tilde(ord(0.0), c(0.0)), Err(LaplaceError::ZeroArgument));
    }

    #[test]
    fn positive_and_decreasing_on_real_axis() {
        for &nu in &[-0.5, 0.0, 0.5, 1.0] {
            let mut prev = (f64::INFINITY, f64::INFINITY);
            for k in 0..60 {
                let s = 10f64.powf(-3.0 + 0.15 * k as f64);
                let p = psi_tilde_real(ord(nu), s).unwrap();
                let f = phi_tilde_real(ord(nu), s).unwrap();
                assert!(p > 0.0 && f > 0.0 && f < 1.0);
                assert!(p < prev.0 && f < prev.1);
                prev = (p, f);
            }
        }
    }

    #[test]
    fn talbot_elementary() {
        // 48 nodes amplify rounding by about e^{2M/5}; 24 nodes do not
        let full = TalbotConfig::default();
        let half = TalbotConfig::new(24).unwrap();
        for &t in &[0.01, 0.5, 1.0, 7.0] {
            let e = invert_numeric(|s| Ok(s.inv()), t, &full).unwrap();
            assert!((e.value - 1.0).abs() < 1e-7);
            let e = invert_numeric(|s| Ok((s + 1.0).inv()), t, &half).unwrap();
            assert!((e.value / (-t).exp() - 1.0).abs() < 1e-9, "t {t}");
            let e = invert_numeric(|s| Ok((s + 1.0).inv()), t, &full).unwrap();
            assert!((e.value / (-t).exp() - 1.0).abs() < 2e-6, "t {t}");
        }
    }

    #[test]
    fn shift_rescues_decaying_target() {
        let plain = TalbotConfig::new(24).unwrap();
        let shifted = plain.with_shift(19.5).unwrap();
        let t = 5.0;
        let exact = (-20.0f64 * t).exp();
        let a = invert_numeric(|s| Ok((s + 20.0).inv()), t, &plain).unwrap();
        let b = invert_numeric(|s| Ok((s + 20.0).inv()), t, &shifted).unwrap();
        assert!((a.value / exact - 1.0).abs() > 1.0);
        assert!((b.value / exact - 1.0).abs() < 1e-9);
        assert!(!b.degraded);
    }

    #[test]
    fn talbot_config_validation() {
        assert!(TalbotConfig::new(15).is_err());
        assert!(TalbotConfig::new(17).is_err());
        assert!(TalbotConfig::new(16).is_ok());
        assert_eq!(TalbotConfig::default().node_count(), 48);
        assert!((TalbotConfig::default().contour_scale(2.0) - 9.6).abs() < 1e-15);
        assert!(invert_numeric(|s| Ok(s.inv()), 0.0, &TalbotConfig::default()).is_err());
    }

    #[test]
    fn first_rate_bound_is_below_first_rate() {
        let j1 = [
            (-0.5, std::f64::consts::FRAC_PI_2),
            (0.0, 2.404_825_557_695_773),
            (1.0, 3.831_705_970_207_512_3),
        ];
        for (nu, j) in j1 {
            let b = first_rate_lower_bound(nu);
            assert!(b < j * j && b > 0.99 * j * j);
        }
    }

    #[test]
    fn inversions_match_frozen_values() {
        // Ψ_1(0.05), Φ_0(0.1): mpmath residue series to 25 digits
        let psi_ref = 25.115_058_701_753_430_003_143_939_103_7;
        let phi_ref = 2.435_584_308_063_366_282_797_656_958_51;
        for (cfg, tol) in [
            (TalbotConfig::default(), 5e-7),
            (TalbotConfig::new(24).unwrap(), 1e-10),
        ] {
            let p = invert_psi(ord(1.0), 0.05, &cfg).unwrap();
            assert!((p.value / psi_ref - 1.0).abs() < tol);
            let f = invert_phi(ord(0.0), 0.1, &cfg).unwrap();
            assert!((f.value / phi_ref - 1.0).abs() < tol);
        }
    }
}
