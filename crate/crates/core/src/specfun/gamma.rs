//! Gamma function, its logarithm and the Pochhammer symbol.

use crate::error::{Result, VstateError};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(x: f64) -> f64 {
    let mut s = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (x + k as f64);
    }
    s
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x) for real x off the non-positive integers.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(VstateError::domain(format!("gamma of non-finite {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(VstateError::Pole(x));
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma(1.0 - x)?));
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    // split the power so that t^(y+1/2) does not overflow before e^-t is applied
    let half = t.powf(0.5 * (y + 0.5));
    Ok((2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(y))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(VstateError::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (y + 0.5) * t.ln() - t + lanczos_sum(y).ln())
}

/// Γ(x)/Γ(y) for positive arguments, through logarithms when either is large.
pub fn gamma_ratio(x: f64, y: f64) -> Result<f64> {
    if x < 140.0 && y < 140.0 {
        Ok(gamma(x)? / gamma(y)?)
    } else {
        Ok((ln_gamma(x)? - ln_gamma(y)?).exp())
    }
}

/// Rising factorial (x)_n.
pub fn pochhammer(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |p, k| p * (x + k as f64))
}

/// (x)_n / n!, accumulated factor by factor to stay in range for large n.
pub fn pochhammer_over_factorial(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |p, k| p * (x + k as f64) / (k as f64 + 1.0))
}
