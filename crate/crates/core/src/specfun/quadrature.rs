//! Brute-force evaluation of the Bessel-product integral behind Λ_n(b).

use super::bessel::bessel_j;
use crate::error::{Result, VstateError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Truncation and resolution controls for the semi-infinite integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Truncation point T; the tail is averaged over windows starting at T.
    pub upper_cutoff: f64,
    /// Gauss–Legendre panels per period of the fast oscillation.
    pub panels: usize,
    /// Allowed relative disagreement between two successive window averages.
    pub rel_tol: f64,
}

impl QuadratureSpec {
    pub fn new(upper_cutoff: f64, panels: usize, rel_tol: f64) -> Result<Self> {
        if !(upper_cutoff > 0.0) || panels < 16 || !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(VstateError::domain(format!(
                "bad quadrature spec: T = {upper_cutoff}, panels = {panels}, rel_tol = {rel_tol}"
            )));
        }
        Ok(Self { upper_cutoff, panels, rel_tol })
    }

    /// Default cutoff max(200/(1−b), 8(n²+1)/b): far enough that both Bessel
    /// factors are in their oscillatory regime.
    pub fn default_for(n: usize, b: f64) -> Self {
        let nf = n as f64;
        Self {
            upper_cutoff: (200.0 / (1.0 - b)).max(8.0 * (nf * nf + 1.0) / b),
            panels: 16,
            rel_tol: 1e-8,
        }
    }
}

const GL_ORDER: usize = 10;

/// Gauss–Legendre nodes and weights on [−1, 1], found by Newton iteration.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if order == 1 {
                p0 = 1.0;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[order - 1 - i] = w[i];
    }
    (x, w)
}

fn gl10() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

fn panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let (x, w) = gl10();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    x.iter().zip(w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

const WINDOW_POWER: usize = 12;
const WINDOW_BEATS: f64 = 32.0;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Cumulative distribution of the window sin^{2p}(πs)/∫sin^{2p} on [0, 1].
fn window_cdf(s: f64) -> f64 {
    let p = WINDOW_POWER;
    let centre = binomial(2 * p, p);
    let mut acc = s;
    for k in 1..=p {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        acc += 2.0 * sign * binomial(2 * p, p - k) / centre * (2.0 * PI * kf * s).sin() / (2.0 * PI * kf);
    }
    acc
}

/// (1/b) ∫₀^∞ J_n(bt) J_n(t) t^{α−1} dt, by panel quadrature up to the cutoff
/// followed by a window-weighted average of the partial integrals over 32
/// periods of the slow beat 2π/(1−b). Two consecutive windows must agree.
pub fn lambda_quadrature_oracle(n: usize, b: f64, alpha: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(b > 0.0 && b < 1.0) {
        return Err(VstateError::domain(format!("oracle needs 0 < b < 1, got {b}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(VstateError::domain(format!("oracle needs 0 < alpha <= 1, got {alpha}")));
    }
    let f = |t: f64| bessel_j(n, b * t) * bessel_j(n, t) * t.powf(alpha - 1.0);
    let width = 2.0 * PI / (1.0 + b) / spec.panels as f64;
    let cutoff = spec.upper_cutoff.max(2.0 * width);
    let window = WINDOW_BEATS * 2.0 * PI / (1.0 - b);

    let mut head = 0.0;
    let mut hi = width;
    for _ in 0..60 {
        let lo = 0.5 * hi;
        head += panel(&f, lo, hi);
        hi = lo;
    }
    let span = |lo: f64, hi: f64, g: &dyn Fn(f64) -> f64| -> f64 {
        let count = ((hi - lo) / width).ceil().max(1.0) as usize;
        let step = (hi - lo) / count as f64;
        (0..count).map(|k| panel(&g, lo + k as f64 * step, lo + (k + 1) as f64 * step)).sum()
    };
    head += span(width, cutoff, &f);

    let mid = cutoff + window;
    let weighted = |start: f64| move |t: f64| f(t) * (1.0 - window_cdf((t - start) / window));
    let first_window = span(cutoff, mid, &weighted(cutoff));
    let full_first = span(cutoff, mid, &f);
    let second_window = span(mid, mid + window, &weighted(mid));

    let e1 = head + first_window;
    let e2 = head + full_first + second_window;
    if (e1 - e2).abs() > spec.rel_tol * e2.abs() {
        return Err(VstateError::NonConvergence(format!(
            "window averages {e1:e} and {e2:e} differ beyond rel_tol {}",
            spec.rel_tol
        )));
    }
    Ok(e2 / b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        for p in 0..20 {
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p)).sum();
            let want = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((got - want).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn window_cdf_endpoints() {
        assert!(window_cdf(0.0).abs() < 1e-16);
        assert!((window_cdf(1.0) - 1.0).abs() < 1e-15);
        assert!((window_cdf(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weber_schafheitlin_at_alpha_one() {
        // Sonine–Schafheitlin with λ = 0, μ = ν = 1
        let b = 0.5;
        let got = lambda_quadrature_oracle(1, b, 1.0, &QuadratureSpec::default_for(1, b)).unwrap();
        let want = 0.5 * crate::specfun::hyp2f1(0.5, 1.5, 2.0, b * b).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-8);
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(QuadratureSpec::new(10.0, 8, 1e-6).is_err());
        assert!(QuadratureSpec::new(-1.0, 16, 1e-6).is_err());
        assert!(QuadratureSpec::new(10.0, 16, 1.0).is_err());
    }
}
