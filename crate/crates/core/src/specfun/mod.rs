//! Special functions and the kernel sequences Λ_n(b), Θ_n built from them.

mod annulus;
mod bessel;
mod gamma;
mod hypergeometric;
mod quadrature;

pub use annulus::{annulus_integral_closed, annulus_integral_oracle, AnnulusKind};
pub use bessel::bessel_j;
pub use gamma::{gamma, gamma_ratio, ln_gamma, pochhammer, pochhammer_over_factorial};
pub use hypergeometric::{hyp2f1, series as hyp2f1_series};
pub use quadrature::{gauss_legendre, lambda_quadrature_oracle, QuadratureSpec};

use crate::error::{Result, VstateError};
use std::f64::consts::PI;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(VstateError::domain(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

/// C_α = Γ(α/2) / (2^{1−α} Γ(1−α/2)).
pub fn c_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(gamma(0.5 * alpha)? / (2f64.powf(1.0 - alpha) * gamma(1.0 - 0.5 * alpha)?))
}

/// Λ_n(b) = C_α (α/2)_n/n! b^{n−1} F(α/2, n+α/2; n+1; b²), with the
/// Gauss-summed value at b = 1.
pub fn lambda_n(n: usize, b: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if n == 0 || !(b > 0.0 && b <= 1.0) {
        return Err(VstateError::domain(format!("lambda_n needs n >= 1 and 0 < b <= 1, got n = {n}, b = {b}")));
    }
    let h = 0.5 * alpha;
    let nf = n as f64;
    if b == 1.0 {
        let front = gamma(1.0 - alpha)? / (2f64.powf(1.0 - alpha) * gamma(1.0 - h)?.powi(2));
        return Ok(front * gamma_ratio(nf + h, nf + 1.0 - h)?);
    }
    Ok(c_alpha(alpha)? * pochhammer_over_factorial(h, n) * b.powi(n as i32 - 1) * hyp2f1(h, nf + h, nf + 1.0, b * b)?)
}

/// Θ_n = Λ_1(1) − Λ_n(1); zero at n = 1 by construction.
pub fn theta_n(n: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(VstateError::domain("theta_n needs n >= 1"));
    }
    let h = 0.5 * alpha;
    let front = gamma(1.0 - alpha)? / (2f64.powf(1.0 - alpha) * gamma(1.0 - h)?.powi(2));
    let ratio = |k: f64| gamma_ratio(k + h, k + 1.0 - h);
    Ok(front * (ratio(1.0)? - ratio(n as f64)?))
}

/// Limits of the kernels as α → 0 and α → 1, for tests only.
pub mod limits {
    use super::*;

    pub fn theta_euler(n: usize) -> f64 {
        (n as f64 - 1.0) / (2.0 * n as f64)
    }

    pub fn lambda_euler(n: usize, b: f64) -> f64 {
        b.powi(n as i32 - 1) / (2.0 * n as f64)
    }

    pub fn theta_sqg(n: usize) -> f64 {
        2.0 / PI * (1..n).map(|k| 1.0 / (2.0 * k as f64 + 1.0)).sum::<f64>()
    }

    /// (1/b)∫ J_n(bt)J_n(t) dt by quadrature.
    pub fn lambda_sqg(n: usize, b: f64) -> Result<f64> {
        lambda_quadrature_oracle(n, b, 1.0, &QuadratureSpec::default_for(n, b))
    }
}
