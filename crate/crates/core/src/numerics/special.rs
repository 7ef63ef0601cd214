use std::f64::consts::PI;

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
// published coefficients, kept digit for digit
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
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

// B_{2k} / (2k (2k-1)) for k = 1..8
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const STIRLING_MIN_ARG: f64 = 10.0;

/// `ln Γ(x)` for `x > 0`.
///
/// Lanczos approximation (g = 7) for `x >= 0.5`, reflection below that.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            what: "log_gamma",
            value: x,
            expected: "finite x > 0",
        });
    }
    Ok(log_gamma_positive(x))
}

fn log_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx), and sin(πx) > 0 on (0, 1/2)
        return (PI / (PI * x).sin()).ln() - log_gamma_positive(1.0 - x);
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// `ln Γ(a) - ln Γ(b)` for `a, b > 0`.
///
/// For large arguments the two log-gammas are each of order `a ln a` while
/// their difference is modest, so the difference is taken inside the
/// Stirling series instead of subtracting two rounded values.
pub fn log_gamma_ratio(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma_ratio_reduced(a, b)? + (a - b) * b.ln())
}

/// `ln Γ(a) - ln Γ(b) - (a - b) ln b`, the part of the ratio left after
/// removing its dominant power of `b`; small when `a - b` is small relative
/// to `b`, and accurate in that regime.
pub fn log_gamma_ratio_reduced(a: f64, b: f64) -> Result<f64> {
    let la = log_gamma(a)?;
    let lb = log_gamma(b)?;
    let d = a - b;
    if a.min(b) < STIRLING_MIN_ARG {
        return Ok(la - lb - d * b.ln());
    }
    let mut diff = (a - 0.5) * (d / b).ln_1p() - d;
    let (ia, ib) = (a.recip(), b.recip());
    let (ia2, ib2) = (ia * ia, ib * ib);
    let (mut pa, mut pb) = (ia, ib);
    for c in STIRLING_COEFFS {
        diff += c * (pa - pb);
        pa *= ia2;
        pb *= ib2;
    }
    Ok(diff)
}

/// Standard normal distribution function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// `|e^x - 1|` without cancellation near zero; `x = -inf` gives 1.
pub fn abs_expm1(x: f64) -> f64 {
    x.exp_m1().abs()
}
