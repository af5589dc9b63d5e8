//! Gauss hypergeometric function on the real segment [0, 1].

use super::gamma::{gamma, ln_gamma};
use crate::error::{Result, VstateError};
use std::f64::consts::PI;

const SERIES_MAX_TERMS: usize = 200_000;
const EPS: f64 = 1e-17;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// F(a, b; c; z) for z in [0, 1].
///
/// Power series up to z = 1/2, Euler's integral beyond, Gauss' formula at z = 1.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(VstateError::Pole(c));
    }
    if !(0.0..=1.0).contains(&z) || !a.is_finite() || !b.is_finite() || !c.is_finite() {
        return Err(VstateError::domain(format!("hyp2f1 needs z in [0,1], got {z}")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    let terminating = is_nonpositive_integer(a) || is_nonpositive_integer(b);
    if z == 1.0 && !terminating {
        return gauss_at_one(a, b, c);
    }
    if z <= 0.5 || terminating {
        return series(a, b, c, z);
    }
    let a_ok = c > a && a > 0.0;
    let b_ok = c > b && b > 0.0;
    match (a_ok, b_ok) {
        (true, true) if a > b => euler_integral(a, b, c, z),
        (_, true) => euler_integral(b, a, c, z),
        (true, false) => euler_integral(a, b, c, z),
        (false, false) => series(a, b, c, z),
    }
}

fn gauss_at_one(a: f64, b: f64, c: f64) -> Result<f64> {
    let s = c - a - b;
    if s <= 0.0 {
        return Err(VstateError::Divergence(s));
    }
    Ok(gamma(c)? * gamma(s)? / (gamma(c - a)? * gamma(c - b)?))
}

/// Direct summation of the defining series.
pub fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        // Kahan summation
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term == 0.0 {
            return Ok(sum);
        }
        let rho = ratio.abs().max(z);
        if rho < 1.0 && kf > (a.abs() + b.abs()) && term.abs() * rho / (1.0 - rho) < EPS * sum.abs() {
            return Ok(sum);
        }
    }
    Err(VstateError::NonConvergence(format!(
        "hypergeometric series ({a}, {b}; {c}; {z}) did not converge"
    )))
}

fn ln_sigmoid(y: f64) -> f64 {
    // ln(1/(1+e^{-y}))
    if y > 0.0 {
        -(-y).exp().ln_1p()
    } else {
        y - y.exp().ln_1p()
    }
}

/// Euler integral with the parameter p satisfying c > p > 0:
/// F = Γ(c)/(Γ(p)Γ(c−p)) ∫₀¹ x^{p−1}(1−x)^{c−p−1}(1−zx)^{−q} dx,
/// evaluated by tanh-sinh quadrature in logarithmic form.
fn euler_integral(p: f64, q: f64, c: f64, z: f64) -> Result<f64> {
    let ln_pref = ln_gamma(c)? - ln_gamma(p)? - ln_gamma(c - p)?;
    let one_minus_z = 1.0 - z;
    let integrand = |t: f64| -> f64 {
        let s = 0.5 * PI * t.sinh();
        let ln_x = ln_sigmoid(2.0 * s);
        let ln_1mx = ln_sigmoid(-2.0 * s);
        let base = one_minus_z + z * ln_1mx.exp();
        let ln_w = p * ln_x + (c - p) * ln_1mx - q * base.ln() + (PI * t.cosh()).ln();
        ln_w.exp()
    };
    let side_sum = |h: f64, start: usize, stride: usize| -> f64 {
        let mut acc = 0.0;
        for dir in [1.0, -1.0] {
            let mut k = start;
            loop {
                let t = dir * h * k as f64;
                if t.abs() > 12.0 {
                    break;
                }
                let v = integrand(t);
                acc += v;
                if k > 4 && v < 1e-20 * acc.abs().max(1e-300) {
                    break;
                }
                k += stride;
            }
        }
        acc
    };
    let mut h = 0.5;
    let mut raw = integrand(0.0) + side_sum(h, 1, 1);
    let mut estimate = h * raw;
    for level in 1..12 {
        h *= 0.5;
        raw += side_sum(h, 1, 2);
        let next = h * raw;
        let diff = (next - estimate).abs();
        estimate = next;
        if level >= 3 && diff <= 1e-15 * estimate.abs() {
            break;
        }
    }
    Ok(ln_pref.exp() * estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn origin_and_trivial() {
        assert_eq!(hyp2f1(0.3, 0.7, 1.5, 0.0).unwrap(), 1.0);
        assert_eq!(hyp2f1(0.0, 0.7, 1.5, 0.9).unwrap(), 1.0);
    }

    #[test]
    fn elementary_closed_forms() {
        // F(1,1;2;z) = -ln(1-z)/z
        for &z in &[0.1, 0.5, 0.7, 0.95, 0.999] {
            let want = -(1.0f64 - z).ln() / z;
            assert_relative_eq!(hyp2f1(1.0, 1.0, 2.0, z).unwrap(), want, max_relative = 1e-13);
        }
        // F(a,b;b;z) = (1-z)^{-a}
        for &z in &[0.3, 0.8, 0.99] {
            assert_relative_eq!(hyp2f1(0.4, 1.3, 1.3, z).unwrap(), (1.0f64 - z).powf(-0.4), max_relative = 1e-13);
        }
        // F(1/2,1/2;3/2;z^2) = asin(z)/z
        for &x in &[0.2f64, 0.8, 0.97] {
            assert_relative_eq!(hyp2f1(0.5, 0.5, 1.5, x * x).unwrap(), x.asin() / x, max_relative = 1e-13);
        }
    }

    #[test]
    fn value_at_one() {
        let want = gamma(2.0).unwrap() * gamma(1.25).unwrap() / (gamma(1.75).unwrap() * gamma(1.5).unwrap());
        assert_relative_eq!(hyp2f1(0.25, 0.5, 2.0, 1.0).unwrap(), want, max_relative = 1e-14);
        assert!(matches!(hyp2f1(1.0, 1.0, 2.0, 1.0), Err(VstateError::Divergence(_))));
        assert!(matches!(hyp2f1(1.0, 1.0, -2.0, 0.3), Err(VstateError::Pole(_))));
    }

    #[test]
    fn polynomial_case() {
        // F(-2, b; c; z) = 1 - 2bz/c + b(b+1)z^2/(c(c+1))
        let (b, c, z) = (0.7, 1.9, 0.8);
        let want = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
        assert_relative_eq!(hyp2f1(-2.0, b, c, z).unwrap(), want, max_relative = 1e-14);
    }

    #[test]
    fn integral_matches_long_series_near_one() {
        for &(a, b, c) in &[(0.25, 1.25, 2.0), (0.45, 4.45, 5.0), (0.05, 8.05, 9.0), (1.45, 1.45, 2.0)] {
            for &z in &[0.6, 0.95, 0.99] {
                let s = series(a, b, c, z).unwrap();
                let f = hyp2f1(a, b, c, z).unwrap();
                assert_relative_eq!(f, s, max_relative = 1e-12);
            }
        }
    }
}
