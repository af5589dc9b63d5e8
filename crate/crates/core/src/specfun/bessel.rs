//! Bessel functions of the first kind J_n(x) for integer order.

use super::gamma::ln_gamma;
use std::f64::consts::PI;

/// J_n(x). Negative x is handled through J_n(−x) = (−1)^n J_n(x).
pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if x <= 8.0 || 0.25 * x * x < nf + 1.0 {
        return series(n, x);
    }
    if x >= 25.0 {
        if let Some(v) = hankel(n, x) {
            return v;
        }
    }
    miller(n, x)
}

/// Defining power series Σ (−1)^k (x/2)^{2k+n} / (k!(n+k)!).
pub fn series(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    let half = 0.5 * x;
    let lead = if n == 0 {
        1.0
    } else {
        (nf * half.ln() - ln_gamma(nf + 1.0).expect("positive argument")).exp()
    };
    if lead == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..10_000 {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (nf + kf + 1.0));
        sum += term;
        if (kf + 1.0) * (nf + kf + 1.0) > q && term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Hankel asymptotic expansion; `None` if the smallest term is not below 1e−16.
fn hankel(n: usize, x: f64) -> Option<f64> {
    let mu = 4.0 * (n as f64).powi(2);
    let mut a = 1.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut last = f64::INFINITY;
    let mut converged = false;
    for k in 1..200 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        let mag = a.abs();
        if mag > last {
            break;
        }
        last = mag;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if mag < 1e-17 {
            converged = true;
            break;
        }
    }
    if !converged && last > 1e-16 {
        return None;
    }
    let phase = ((n % 4) as f64 * 0.5 + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    Some((2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi))
}

/// Miller backward recurrence normalised by J_0 + 2ΣJ_{2k} = 1.
fn miller(n: usize, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut start = (top + (40.0 * top).sqrt() + 20.0) as usize;
    start += start % 2;
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    let mut value = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 == n {
            value = cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            value *= 1e-250;
        }
    }
    norm += cur;
    value / norm
}
