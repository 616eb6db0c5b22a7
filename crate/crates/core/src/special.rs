//! Special functions backing the closed-form kernel algebra: the log-gamma
//! function, the regularized lower incomplete gamma function (in log form),
//! and a stable `log((e^x - 1)/x)`.
//!
//! Everything here works in the log domain because the quantities these feed
//! (convolution-power coefficients, tail probabilities) decay like `1/Γ(cn)`
//! and underflow `f64` long before the interesting asymptotic regime.

use crate::error::{Error, Result};

use std::f64::consts::PI;

/// Lanczos parameter g = 7 with the 9-term coefficient set tabulated by
/// Godfrey; gives close to full double precision for `x > 0.5`.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
///
/// Lanczos approximation for `x >= 0.5`, reflection formula below. Relative
/// accuracy is at the 1e-14 level across `[1e-3, 1e4]` (see the tests, which
/// pin this against an independent implementation and exact anchors).
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || x == f64::INFINITY {
        return Err(Error::Domain(format!(
            "log_gamma requires x > 0, got {x}"
        )));
    }
    Ok(log_gamma_unchecked(x))
}

fn log_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // log Γ(x) = log(π / sin(πx)) - log Γ(1 - x); sin(πx) > 0 on (0, 1/2).
        return PI.ln() - (PI * x).sin().ln() - log_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// `log((e^x - 1)/x)`, continuous at 0 where the value is `log 1 = 0`.
///
/// This is the log of `∫_0^1 e^{x t} dt`, the building block of the exact
/// rank-one norm formulas; it must stay accurate for `x` anywhere from large
/// negative to a few thousand.
pub fn ln_expm1_over_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x > 30.0 {
        // (e^x - 1)/x = e^x (1 - e^{-x})/x; safe from overflow for all x.
        x + (-(-x).exp()).ln_1p() - x.ln()
    } else {
        (x.exp_m1() / x).ln()
    }
}

/// Log of the regularized lower incomplete gamma function
/// `P(a, x) = γ(a, x)/Γ(a)` for `a > 0`, `x >= 0`.
///
/// Series expansion for `x < a + 1` (kept in log form so that tail
/// probabilities like `P(40, 1) ~ 1e-49` survive), Lentz continued fraction
/// for the complement otherwise (where `P` is of order one).
pub fn log_reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if a.is_nan() || a <= 0.0 || a == f64::INFINITY {
        return Err(Error::Domain(format!(
            "log_reg_lower_gamma requires a > 0, got a = {a}"
        )));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "log_reg_lower_gamma requires x >= 0, got x = {x}"
        )));
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let log_prefactor = a * x.ln() - x - log_gamma_unchecked(a);
    if x < a + 1.0 {
        // γ(a,x) = x^a e^{-x} Σ_{k≥0} x^k / (a (a+1) ... (a+k))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= x / (a + k);
            sum += term;
            if term < sum * 1e-17 || k > 10_000.0 {
                break;
            }
        }
        Ok(log_prefactor + sum.ln())
    } else {
        // Modified Lentz evaluation of the continued fraction for Q(a,x).
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let log_q = log_prefactor + h.ln();
        // x >= a + 1 keeps Q bounded away from 1, so 1 - e^{log_q} is safe.
        Ok((-log_q.exp()).ln_1p())
    }
}
