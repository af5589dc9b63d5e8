//! Mean-value contour integrals over the unit circle that arise when the
//! velocity field of an annulus is perturbed, in closed form and by direct
//! trapezoidal quadrature.

use super::gamma::pochhammer_over_factorial;
use super::hypergeometric::hyp2f1;
use crate::error::{Result, VstateError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which of the five kernels to integrate.
///
/// With ⨍ = (1/2πi)∮ dτ over the unit circle and w on the unit circle:
/// - `I`: ⨍ τ^{n−1} / |w − bτ|^α
/// - `J`: ⨍ (w − bτ)(a w^n − c τ^n) / |w − bτ|^{α+2}
/// - `K`: ⨍ (w̄ − bτ̄)(a w̄^n − c τ̄^n) / |w − bτ|^{α+2}
/// - `L`: ⨍ (bw − τ)(a w^n − c τ^n) / |bw − τ|^{α+2}
/// - `M`: ⨍ (bw̄ − τ̄)(a w̄^n − c τ̄^n) / |bw − τ|^{α+2}
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnnulusKind {
    I,
    J,
    K,
    L,
    M,
}

impl AnnulusKind {
    pub const ALL: [AnnulusKind; 5] = [AnnulusKind::I, AnnulusKind::J, AnnulusKind::K, AnnulusKind::L, AnnulusKind::M];
}

fn check(kind: AnnulusKind, n: usize, b: f64, alpha: f64) -> Result<()> {
    if !(b > 0.0 && b < 1.0) {
        return Err(VstateError::domain(format!("annulus integral needs 0 < b < 1, got {b}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(VstateError::domain(format!("annulus integral needs 0 < alpha < 1, got {alpha}")));
    }
    if kind == AnnulusKind::K && n == 0 {
        return Err(VstateError::domain("kind K needs n >= 1"));
    }
    Ok(())
}

/// Closed-form coefficient of w^n (I), w^{n+2} (J, L) or w̄^n (K, M).
/// The parameters `a`, `c` are ignored for kind I.
pub fn annulus_integral_closed(kind: AnnulusKind, n: usize, b: f64, alpha: f64, a: f64, c: f64) -> Result<Complex64> {
    check(kind, n, b, alpha)?;
    let h = 0.5 * alpha;
    let z = b * b;
    let nf = n as f64;
    let bn = b.powi(n as i32);
    let v = match kind {
        AnnulusKind::I => bn * pochhammer_over_factorial(h, n) * hyp2f1(h, nf + h, nf + 1.0, z)?,
        AnnulusKind::J => {
            b * (a * (1.0 + h) * hyp2f1(h, 2.0 + h, 2.0, z)?
                - c * bn * pochhammer_over_factorial(1.0 + h, n + 1) * hyp2f1(h, nf + 2.0 + h, nf + 2.0, z)?)
        }
        AnnulusKind::K => {
            a * b * h * hyp2f1(h + 1.0, h + 1.0, 2.0, z)?
                - c * b.powi(n as i32 - 1) * pochhammer_over_factorial(1.0 + h, n - 1) * hyp2f1(h, nf + h, nf, z)?
        }
        AnnulusKind::L => {
            -z * (a * 0.5 * h * (h + 1.0) * hyp2f1(1.0 + h, 2.0 + h, 3.0, z)?
                - c * bn * pochhammer_over_factorial(h, n + 2) * hyp2f1(1.0 + h, nf + 2.0 + h, nf + 3.0, z)?)
        }
        AnnulusKind::M => {
            -(a * hyp2f1(h, h + 1.0, 1.0, z)? - c * bn * pochhammer_over_factorial(h, n) * hyp2f1(h + 1.0, nf + h, nf + 1.0, z)?)
        }
    };
    Ok(Complex64::new(v, 0.0))
}

/// Trapezoidal rule for the defining integral at w = 1.
pub fn annulus_integral_oracle(kind: AnnulusKind, n: usize, b: f64, alpha: f64, a: f64, c: f64, nodes: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let tau = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / nodes as f64);
        let taubar = tau.conj();
        let g = match kind {
            AnnulusKind::I => tau.powi(n as i32 - 1) / (1.0 - b * tau).norm().powf(alpha),
            AnnulusKind::J => (1.0 - b * tau) * (a - c * tau.powi(n as i32)) / (1.0 - b * tau).norm().powf(alpha + 2.0),
            AnnulusKind::K => {
                (1.0 - b * taubar) * (a - c * taubar.powi(n as i32)) / (1.0 - b * tau).norm().powf(alpha + 2.0)
            }
            AnnulusKind::L => (b - tau) * (a - c * tau.powi(n as i32)) / (b - tau).norm().powf(alpha + 2.0),
            AnnulusKind::M => (b - taubar) * (a - c * taubar.powi(n as i32)) / (b - tau).norm().powf(alpha + 2.0),
        };
        acc += g * tau;
    }
    acc / nodes as f64
}
