use std::f64::consts::PI;

use super::SpecFunError;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (z - 1)
    let mut a = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma function Γ(x) for real x.
///
/// Uses the Lanczos approximation for `x >= 0.5` and the reflection formula
/// below. Errors at the poles `0, -1, -2, ...` and when Γ(x) overflows.
pub fn gamma(x: f64) -> Result<f64, SpecFunError> {
    if x.is_nan() {
        return Err(SpecFunError::InvalidArgument("gamma of NaN".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(SpecFunError::Pole(x));
    }
    if x < 0.5 {
        // Γ(x) Γ(1-x) = π / sin(πx)
        let g = gamma(1.0 - x)?;
        return Ok(PI / ((PI * x).sin() * g));
    }
    if x > 171.62 {
        return Err(SpecFunError::Overflow {
            log_magnitude: ln_gamma(x)?,
        });
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let a = lanczos_sum(z);
    // split the power to keep t^(z+0.5) finite near the overflow limit
    let half = t.powf(0.5 * (z + 0.5));
    Ok((2.0 * PI).sqrt() * half * (-t).exp() * half * a)
}

/// Natural log of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) {
        return Err(SpecFunError::InvalidArgument(format!(
            "ln_gamma requires x > 0, got {x}"
        )));
    }
    if x < 0.5 {
        // ln Γ(x) = ln π - ln sin(πx) - ln Γ(1-x)
        return Ok(PI.ln() - (PI * x).sin().ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// Reciprocal gamma 1/Γ(x); entire, so it is zero at the poles of Γ.
pub fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x > 171.0 {
        return match ln_gamma(x) {
            Ok(lg) => (-lg).exp(),
            Err(_) => f64::NAN,
        };
    }
    match gamma(x) {
        Ok(g) => 1.0 / g,
        Err(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Stirling series for ln Γ at large argument, moved down by the
    /// recurrence Γ(x) = Γ(x + n) / (x (x+1) ... (x+n-1)).
    fn gamma_stirling_oracle(x: f64) -> f64 {
        let shift = 30usize;
        let y = x + shift as f64;
        let inv = 1.0 / y;
        let inv2 = inv * inv;
        let series = inv
            * (1.0 / 12.0
                - inv2
                    * (1.0 / 360.0
                        - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
        let ln_g = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series;
        let mut prod = 1.0;
        for k in 0..shift {
            prod *= x + k as f64;
        }
        ln_g.exp() / prod
    }

    #[test]
    fn gamma_trivial_values() {
        assert!(rel(gamma(1.0).unwrap(), 1.0) < 1e-15);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-15);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-14);
    }

    #[test]
    fn gamma_7_3_matches_high_precision_value() {
        // mpmath, 30 significant digits
        let expected = 1271.423_633_663_909_273_057_993_626_68;
        assert!(rel(gamma(7.3).unwrap(), expected) < 1e-13);
        assert!(rel(gamma_stirling_oracle(7.3), expected) < 1e-13);
    }

    #[test]
    fn gamma_relative_error_on_half_to_fifty() {
        let mut x = 0.5;
        while x <= 50.0 {
            let g = gamma(x).unwrap();
            let oracle = gamma_stirling_oracle(x);
            assert!(rel(g, oracle) < 1e-13, "x = {x}: {g} vs {oracle}");
            x += 0.37;
        }
    }

    #[test]
    fn gamma_poles_and_reflection() {
        assert_eq!(gamma(0.0), Err(SpecFunError::Pole(0.0)));
        assert_eq!(gamma(-3.0), Err(SpecFunError::Pole(-3.0)));
        assert!(rel(gamma(-0.5).unwrap(), -2.0 * PI.sqrt()) < 1e-14);
        assert_eq!(recip_gamma(-2.0), 0.0);
        assert!(rel(recip_gamma(0.5), 1.0 / PI.sqrt()) < 1e-15);
    }

    #[test]
    fn recurrence_holds() {
        for &x in &[0.1, 0.73, 2.2, 13.9] {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!(rel(lhs, rhs) < 1e-14);
        }
    }

    #[test]
    fn ln_gamma_consistent() {
        for &x in &[0.3, 1.7, 10.0, 150.0] {
            let direct = gamma(x).unwrap().ln();
            assert!((ln_gamma(x).unwrap() - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
        assert!(gamma(200.0).is_err());
        assert!(recip_gamma(171.5) > 0.0);
        assert_eq!(recip_gamma(200.0), 0.0);
    }
}
