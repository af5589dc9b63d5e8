//! Dispersion relation of the linearised V-state equation at the disc and the
//! annulus.

use crate::error::{Result, VstateError};
use crate::specfun::{lambda_n, theta_n};
use serde::{Deserialize, Serialize};

/// Fractional order, inner radius (absent for a disc) and fold symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsqgParams {
    pub alpha: f64,
    pub b: Option<f64>,
    pub m: usize,
}

impl GsqgParams {
    pub fn new(alpha: f64, b: Option<f64>, m: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(VstateError::domain(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if let Some(b) = b {
            if !(b > 0.0 && b < 1.0) {
                return Err(VstateError::domain(format!("b must lie in (0,1), got {b}")));
            }
        }
        if m < 2 {
            return Err(VstateError::domain(format!("m must be at least 2, got {m}")));
        }
        Ok(Self { alpha, b, m })
    }

    pub fn simply(alpha: f64, m: usize) -> Result<Self> {
        Self::new(alpha, None, m)
    }

    pub fn doubly(alpha: f64, b: f64, m: usize) -> Result<Self> {
        Self::new(alpha, Some(b), m)
    }

    pub fn inner_radius(&self) -> Result<f64> {
        self.b.ok_or_else(|| VstateError::domain("operation needs an inner radius b"))
    }
}

/// 2×2 Fourier multiplier of the linearised operator at the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl SpectralMatrix {
    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.m11 * v[0] + self.m12 * v[1], self.m21 * v[0] + self.m22 * v[1]]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m11: s * self.m11, m12: s * self.m12, m21: s * self.m21, m22: s * self.m22 }
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }
}

/// The two bifurcation angular velocities and the reduced discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub delta: f64,
    pub simple: bool,
}

fn check_mode(n: usize) -> Result<()> {
    if n < 2 {
        return Err(VstateError::domain(format!("mode must be at least 2, got {n}")));
    }
    Ok(())
}

pub fn multiplier_matrix(n: usize, params: &GsqgParams, omega: f64) -> Result<SpectralMatrix> {
    check_mode(n)?;
    let b = params.inner_radius()?;
    let a = params.alpha;
    let th = theta_n(n, a)?;
    let l1 = lambda_n(1, b, a)?;
    let ln = lambda_n(n, b, a)?;
    Ok(SpectralMatrix {
        m11: omega - th + b * b * l1,
        m12: -b * b * ln,
        m21: b * ln,
        m22: b * omega + b.powf(1.0 - a) * th - b * l1,
    })
}

/// det M_n written out in Ω.
pub fn det_multiplier(n: usize, params: &GsqgParams, omega: f64) -> Result<f64> {
    check_mode(n)?;
    let b = params.inner_radius()?;
    let a = params.alpha;
    let th = theta_n(n, a)?;
    let l1 = lambda_n(1, b, a)?;
    let ln = lambda_n(n, b, a)?;
    Ok((omega - th + b * b * l1) * (b * omega + b.powf(1.0 - a) * th - b * l1) + b.powi(3) * ln * ln)
}

/// Coefficients (C_n, D_n) of the determinant as a quadratic in λ = 1 − 2Ω.
pub fn lambda_quadratic(n: usize, params: &GsqgParams) -> Result<(f64, f64)> {
    check_mode(n)?;
    let b = params.inner_radius()?;
    let a = params.alpha;
    let th = theta_n(n, a)?;
    let l1 = lambda_n(1, b, a)?;
    let ln = lambda_n(n, b, a)?;
    let bma = b.powf(-a);
    let c = 1.0 + (bma - 1.0) * th - (1.0 - b * b) * l1;
    let d = -4.0 * bma * th * th + 2.0 * (bma - 1.0 + 2.0 * (1.0 + b.powf(2.0 - a)) * l1) * th
        - 4.0 * b * b * (l1 * l1 - ln * ln)
        - 2.0 * (1.0 - b * b) * l1
        + 1.0;
    Ok((c, d))
}

/// det M_n = (b/4)(λ² − 2C_nλ + D_n) with λ = 1 − 2Ω.
pub fn det_multiplier_lambda_form(n: usize, params: &GsqgParams, omega: f64) -> Result<f64> {
    let b = params.inner_radius()?;
    let (c, d) = lambda_quadratic(n, params)?;
    let lam = 1.0 - 2.0 * omega;
    Ok(0.25 * b * (lam * lam - 2.0 * c * lam + d))
}

/// Δ_n = [(b^{−α}+1)Θ_n − (1+b²)Λ_1(b)]² − 4b²Λ_n(b)²; defined for n ≥ 1.
pub fn discriminant(n: usize, params: &GsqgParams) -> Result<f64> {
    if n == 0 {
        return Err(VstateError::domain("mode must be at least 1"));
    }
    let b = params.inner_radius()?;
    let a = params.alpha;
    let th = theta_n(n, a)?;
    let l1 = lambda_n(1, b, a)?;
    let ln = lambda_n(n, b, a)?;
    let e = (b.powf(-a) + 1.0) * th - (1.0 + b * b) * l1;
    Ok(e * e - 4.0 * b * b * ln * ln)
}

/// Roots λ_n^− ≤ λ_n^+ of the λ-quadratic, i.e. C_n ∓ √Δ_n.
pub fn lambda_roots(n: usize, params: &GsqgParams) -> Result<(f64, f64)> {
    let delta = discriminant(n, params)?;
    if delta < 0.0 {
        return Err(VstateError::NegativeDiscriminant(delta));
    }
    let (c, _) = lambda_quadratic(n, params)?;
    let s = delta.sqrt();
    Ok((c - s, c + s))
}

/// Ω^± = (1−b²)/2 Λ_1(b) + ½(1−b^{−α})Θ_m ± ½√Δ_m.
pub fn eigen_omegas(params: &GsqgParams) -> Result<EigenPair> {
    eigen_omegas_at(params.m, params)
}

/// Same as [`eigen_omegas`] for an arbitrary mode n.
pub fn eigen_omegas_at(n: usize, params: &GsqgParams) -> Result<EigenPair> {
    check_mode(n)?;
    let b = params.inner_radius()?;
    let a = params.alpha;
    let delta = discriminant(n, params)?;
    if delta <= 0.0 {
        return Err(VstateError::NegativeDiscriminant(delta));
    }
    let centre = 0.5 * (1.0 - b * b) * lambda_n(1, b, a)? + 0.5 * (1.0 - b.powf(-a)) * theta_n(n, a)?;
    let s = 0.5 * delta.sqrt();
    Ok(EigenPair { omega_plus: centre + s, omega_minus: centre - s, delta, simple: delta > 0.0 })
}

/// Bifurcation angular velocity from the disc, Ω_m = Θ_m.
pub fn omega_simply(m: usize, alpha: f64) -> Result<f64> {
    check_mode(m)?;
    theta_n(m, alpha)
}

const THRESHOLD_SCAN_LIMIT: usize = 1_000_000;

/// Smallest N ≥ 2 with (b^{−α}+1)Θ_N ≥ (1+b²)Λ_1(b) + 2bΛ_N(b).
pub fn symmetry_threshold(params: &GsqgParams) -> Result<usize> {
    let b = params.inner_radius()?;
    let a = params.alpha;
    let l1 = lambda_n(1, b, a)?;
    for n in 2..THRESHOLD_SCAN_LIMIT {
        if threshold_gap(n, b, a, l1)? >= 0.0 {
            return Ok(n);
        }
    }
    Err(VstateError::domain("symmetry threshold not reached within the scan limit"))
}

/// E_b(n) = (b^{−α}+1)Θ_n − (1+b²)Λ_1(b) − 2bΛ_n(b).
pub fn threshold_function(n: usize, params: &GsqgParams) -> Result<f64> {
    let b = params.inner_radius()?;
    let a = params.alpha;
    threshold_gap(n, b, a, lambda_n(1, b, a)?)
}

fn threshold_gap(n: usize, b: f64, a: f64, l1: f64) -> Result<f64> {
    Ok((b.powf(-a) + 1.0) * theta_n(n, a)? - (1.0 + b * b) * l1 - 2.0 * b * lambda_n(n, b, a)?)
}

/// b ↦ b²Λ_1(b) − Λ_1(1) + 1/2, whose root is the critical radius b₀.
pub fn b0_function(b: f64, alpha: f64) -> Result<f64> {
    Ok(b * b * lambda_n(1, b, alpha)? - lambda_n(1, 1.0, alpha)? + 0.5)
}

/// Critical inner radius by bisection on (0, 1).
pub fn b0_solve(alpha: f64, tol: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(VstateError::domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut mid = 0.5;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let g = b0_function(mid, alpha)?;
        if g.abs() < tol && hi - lo < tol.max(1e-15) {
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(mid)
}

/// Null vector (Ω + b^{−α}Θ_m − Λ_1(b), −Λ_m(b)) of M_m at an eigenvalue.
pub fn kernel_generator(params: &GsqgParams, omega: f64) -> Result<[f64; 2]> {
    let m = params.m;
    let b = params.inner_radius()?;
    let a = params.alpha;
    let det = det_multiplier(m, params, omega)?;
    if det.abs() > 1e-8 * (1.0 + omega.abs()) {
        return Err(VstateError::NotAnEigenvalue { omega, det });
    }
    Ok([omega + b.powf(-a) * theta_n(m, a)? - lambda_n(1, b, a)?, -lambda_n(m, b, a)?])
}

/// lim_{m→∞} Ω_m^− = −b^{−α}Λ_1(1) + Λ_1(b).
pub fn limiting_omega_minus(b: f64, alpha: f64) -> Result<f64> {
    if !(b > 0.0 && b < 1.0) {
        return Err(VstateError::domain(format!("b must lie in (0,1), got {b}")));
    }
    Ok(-b.powf(-alpha) * lambda_n(1, 1.0, alpha)? + lambda_n(1, b, alpha)?)
}

/// (n+1)·M_{n+1}: the block acting on mode n+1 of the linearised operator.
pub fn linearized_block(n: usize, params: &GsqgParams, omega: f64) -> Result<SpectralMatrix> {
    if n == 0 {
        return Err(VstateError::domain("linearized_block needs n >= 1"));
    }
    Ok(multiplier_matrix(n + 1, params, omega)?.scaled((n + 1) as f64))
}

/// Disc analogue of [`linearized_block`]: (n+1)(Ω − Θ_{n+1}).
pub fn linearized_block_simply(n: usize, alpha: f64, omega: f64) -> Result<f64> {
    if n == 0 {
        return Err(VstateError::domain("linearized_block_simply needs n >= 1"));
    }
    Ok((n + 1) as f64 * (omega - theta_n(n + 1, alpha)?))
}

/// Limits of the multiplier as α → 0 (Euler), for tests only.
pub mod limits {
    use super::SpectralMatrix;

    pub fn euler_matrix(n: usize, b: f64, omega: f64) -> SpectralMatrix {
        let nf = n as f64;
        let t = (nf - 1.0) / (2.0 * nf);
        let off = b.powi(n as i32) / (2.0 * nf);
        SpectralMatrix { m11: omega - t + 0.5 * b * b, m12: -b * off, m21: off, m22: b * (omega + t - 0.5) }
    }

    /// 1 + b^m − (1−b²)m/2, negative exactly when the Euler annulus has two
    /// real bifurcation speeds at mode m.
    pub fn euler_condition(m: usize, b: f64) -> f64 {
        1.0 + b.powi(m as i32) - (1.0 - b * b) * m as f64 / 2.0
    }
}
