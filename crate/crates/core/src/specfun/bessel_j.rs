use std::f64::consts::{FRAC_2_PI, PI};

use super::{ln_gamma, recip_gamma, EvalAccuracy, SpecFunError};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const STEED_MAX_ITER: usize = 2_000_000;

// Taylor coefficients of 1/Γ(z) about 0 (c[k] multiplies z^k).
const RGAMMA_TAYLOR: [f64; 23] = [
    0.0,
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
];

#[derive(Debug, Clone, Copy)]
enum Regime {
    Series,
    Hankel,
    Recur,
    Steed,
}

fn regime(nu: f64, x: f64) -> Regime {
    if x <= 4.0 || x * x <= 2.0 * (nu + 1.0) {
        Regime::Series
    } else if x >= 25.0 && x >= nu * nu {
        Regime::Hankel
    } else if x >= 25.0 && x >= 1.5 * (nu + 1.0) {
        Regime::Recur
    } else {
        Regime::Steed
    }
}

fn series(nu: f64, x: f64, acc: &EvalAccuracy) -> Result<f64, SpecFunError> {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = if nu > 100.0 {
        (nu * half.ln() - ln_gamma(nu + 1.0)?).exp()
    } else {
        half.powf(nu) * recip_gamma(nu + 1.0)
    };
    let mut sum = term;
    let mut max_abs = term.abs();
    // terms are bounded by e^{x²/4}-growth; allow enough of them
    let limit = acc.max_terms().max(40 + 2 * x as usize);
    for k in 1..=limit {
        let kf = k as f64;
        term *= -q / (kf * (nu + kf));
        sum += term;
        max_abs = max_abs.max(term.abs());
        if term.abs() <= 0.25 * EPS * max_abs && kf * kf > q {
            return Ok(sum);
        }
    }
    Err(SpecFunError::NotConverged {
        what: "Bessel J power series",
        iterations: limit,
    })
}

/// Large-argument expansion `J_ν(x) = sqrt(2/(πx)) (P cos χ - Q sin χ)`,
/// `χ = x - (ν/2 + 1/4)π`.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev_abs = f64::INFINITY;
    for k in 1..400usize {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64 * x);
        let abs = term.abs();
        if abs >= prev_abs {
            break;
        }
        // u_k enters P (k even) or Q (k odd) with sign (-1)^{floor(k/2)}
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if abs <= 1e-17 {
            break;
        }
        prev_abs = abs;
    }
    // cos(x - φ) with x kept exact
    let phase = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (FRAC_2_PI / x).sqrt() * (p * cos_chi - q * sin_chi)
}

/// `(J_ν, J_{ν+1})` by upward recurrence from the Hankel expansion at the
/// fractional order; the recurrence is stable while the order stays below x.
fn hankel_recur(nu: f64, x: f64) -> (f64, f64) {
    let steps = nu.floor().max(0.0);
    let nu0 = nu - steps;
    let mut a = hankel(nu0, x);
    let mut b = hankel(nu0 + 1.0, x);
    for k in 1..=steps as usize {
        let next = 2.0 * (nu0 + k as f64) / x * b - a;
        a = b;
        b = next;
    }
    (a, b)
}

/// J_ν, J'_ν, Y_ν, Y'_ν for ν >= 0 by Steed's method (CF1 + CF2, Temme's
/// series for Y at small x).
struct Jy {
    j: f64,
    jp: f64,
    y: f64,
    yp: f64,
}

fn temme_gammas(xmu: f64) -> (f64, f64, f64, f64) {
    // gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ), gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2
    let m2 = xmu * xmu;
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    let mut pow = 1.0;
    let mut k = 1;
    while k + 1 < RGAMMA_TAYLOR.len() {
        gam2 += RGAMMA_TAYLOR[k] * pow;
        gam1 -= RGAMMA_TAYLOR[k + 1] * pow;
        pow *= m2;
        k += 2;
    }
    let gampl = gam2 - xmu * gam1;
    let gammi = gam2 + xmu * gam1;
    (gam1, gam2, gampl, gammi)
}

fn steed(nu: f64, x: f64) -> Result<Jy, SpecFunError> {
    const XMIN: f64 = 2.0;
    let nl = if x < XMIN {
        (nu + 0.5) as usize
    } else {
        (nu - x + 1.5).max(0.0) as usize
    };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: f = J'_ν / J_ν
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..STEED_MAX_ITER {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::NotConverged {
            what: "Steed CF1",
            iterations: STEED_MAX_ITER,
        });
    }

    // downward recurrence to order xmu
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1);
    if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS {
            1.0
        } else {
            pimu / pimu.sin()
        };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS {
            1.0
        } else {
            pimu2.sin() / pimu2
        };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut i = 1usize;
        loop {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                break;
            }
            i += 1;
            if i > 10_000 {
                return Err(SpecFunError::NotConverged {
                    what: "Temme series",
                    iterations: i,
                });
            }
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        let rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
    } else {
        // CF2: p + iq = (J' + iY') / (J + iY)
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut i = 2usize;
        loop {
            a += 2.0 * (i - 1) as f64;
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                break;
            }
            i += 1;
            if i > STEED_MAX_ITER {
                return Err(SpecFunError::NotConverged {
                    what: "Steed CF2",
                    iterations: i,
                });
            }
        }
        let gam = (p - f) / q;
        let mag = (w / ((p - f) * gam + q)).sqrt();
        rjmu = mag.copysign(rjl);
        rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }

    let scale = rjmu / rjl;
    let j = rjl1 * scale;
    let jp = rjp1 * scale;
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    let y = rymu;
    let yp = nu * xi * rymu - ry1;
    Ok(Jy { j, jp, y, yp })
}

/// J_ν(x) and J'_ν(x) from Steed's method, reflecting negative orders.
fn steed_j(nu: f64, x: f64) -> Result<(f64, f64), SpecFunError> {
    if nu >= 0.0 {
        let r = steed(nu, x)?;
        return Ok((r.j, r.jp));
    }
    // J_{-μ} = cos(μπ) J_μ - sin(μπ) Y_μ
    let mu = -nu;
    let r = steed(mu, x)?;
    let (s, c) = (mu * PI).sin_cos();
    Ok((c * r.j - s * r.y, c * r.jp - s * r.yp))
}

fn check_args(nu: f64, x: f64) -> Result<(), SpecFunError> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(SpecFunError::InvalidOrder(nu));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::InvalidArgument(format!(
            "Bessel J requires x > 0, got {x}"
        )));
    }
    Ok(())
}

/// Bessel function of the first kind `J_ν(x)` for `ν > -1`, `x > 0`.
pub fn bessel_j(nu: f64, x: f64, acc: &EvalAccuracy) -> Result<f64, SpecFunError> {
    check_args(nu, x)?;
    match regime(nu, x) {
        Regime::Series => series(nu, x, acc),
        Regime::Hankel => Ok(hankel(nu, x)),
        Regime::Recur => Ok(hankel_recur(nu, x).0),
        Regime::Steed => steed_j(nu, x).map(|(j, _)| j),
    }
}

/// `J'_ν(x) = (ν/x) J_ν(x) - J_{ν+1}(x)`.
pub fn bessel_j_deriv(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    j_and_deriv(nu, x).map(|(_, d)| d)
}

/// `(J_ν(x), J'_ν(x))` evaluated consistently in one regime.
pub(crate) fn j_and_deriv(nu: f64, x: f64) -> Result<(f64, f64), SpecFunError> {
    check_args(nu, x)?;
    let acc = EvalAccuracy::default();
    match regime(nu + 1.0, x) {
        Regime::Steed => steed_j(nu, x),
        Regime::Series => {
            let j = series(nu, x, &acc)?;
            let j1 = series(nu + 1.0, x, &acc)?;
            Ok((j, nu / x * j - j1))
        }
        Regime::Hankel => {
            let j = hankel(nu, x);
            let j1 = hankel(nu + 1.0, x);
            Ok((j, nu / x * j - j1))
        }
        Regime::Recur => {
            let (j, j1) = hankel_recur(nu, x);
            Ok((j, nu / x * j - j1))
        }
    }
}
