//! Cosine-series boundaries and the discretised V-state residual.

use crate::error::{Result, VstateError};
use crate::specfun::c_alpha;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Weights used for the self-interaction integral, whose integrand behaves
/// like |φ−θ|^{1−α} near the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelfQuadrature {
    /// Plain trapezoid with the diagonal node dropped; error O(h^{3−α}).
    Trapezoid,
    /// Trapezoid nodes with product-integration weights for the factor
    /// |2 sin((φ−θ)/2)|^{−α}; spectrally accurate.
    #[default]
    Product,
}

/// Grid of N = m·2^r nodes carrying M = 2^{r−1} − 1 cosine modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discretization {
    pub r: u32,
    pub m: usize,
    #[serde(default)]
    pub rule: SelfQuadrature,
}

impl Discretization {
    pub fn new(r: u32, m: usize) -> Result<Self> {
        if !(2..=20).contains(&r) {
            return Err(VstateError::domain(format!("resolution exponent must lie in [2, 20], got {r}")));
        }
        if m < 1 {
            return Err(VstateError::domain("fold symmetry must be positive"));
        }
        Ok(Self { r, m, rule: SelfQuadrature::Product })
    }

    pub fn with_rule(self, rule: SelfQuadrature) -> Self {
        Self { rule, ..self }
    }

    pub fn nodes(&self) -> usize {
        self.m << self.r
    }

    pub fn modes(&self) -> usize {
        (1usize << (self.r - 1)) - 1
    }

    pub fn theta(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.nodes() as f64
    }
}

/// z(θ) = e^{iθ}[ρ + Σ a_k cos(mkθ)] and its θ-derivative.
pub fn cosine_curve(radius: f64, coeffs: &[f64], m: usize, theta: f64) -> (Complex64, Complex64) {
    let mut r = radius;
    let mut dr = 0.0;
    for (k, a) in coeffs.iter().enumerate() {
        let f = (m * (k + 1)) as f64;
        let (s, c) = (f * theta).sin_cos();
        r += a * c;
        dr -= a * f * s;
    }
    let e = Complex64::from_polar(1.0, theta);
    let z = e * r;
    (z, Complex64::i() * z + e * dr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplyState {
    pub alpha: f64,
    pub m: usize,
    pub omega: f64,
    pub radius: f64,
    pub coeffs: Vec<f64>,
}

impl SimplyState {
    /// Unit-mean-radius state.
    pub fn new(alpha: f64, m: usize, omega: f64, coeffs: Vec<f64>) -> Self {
        Self { alpha, m, omega, radius: 1.0, coeffs }
    }

    pub fn eval(&self, theta: f64) -> (Complex64, Complex64) {
        cosine_curve(self.radius, &self.coeffs, self.m, theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublyState {
    pub alpha: f64,
    pub b: f64,
    pub m: usize,
    pub omega: f64,
    pub outer: Vec<f64>,
    pub inner: Vec<f64>,
}

impl DoublyState {
    pub fn new(alpha: f64, b: f64, m: usize, omega: f64, outer: Vec<f64>, inner: Vec<f64>) -> Self {
        Self { alpha, b, m, omega, outer, inner }
    }

    pub fn eval_outer(&self, theta: f64) -> (Complex64, Complex64) {
        cosine_curve(1.0, &self.outer, self.m, theta)
    }

    pub fn eval_inner(&self, theta: f64) -> (Complex64, Complex64) {
        cosine_curve(self.b, &self.inner, self.m, theta)
    }

    /// Outer then inner coefficients, the unknown vector of the solver.
    pub fn packed(&self) -> Vec<f64> {
        self.outer.iter().chain(&self.inner).copied().collect()
    }

    pub fn with_packed(&self, x: &[f64]) -> Self {
        let half = x.len() / 2;
        Self { outer: x[..half].to_vec(), inner: x[half..].to_vec(), ..self.clone() }
    }
}

/// Either kind of boundary state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum State {
    Simply(SimplyState),
    Doubly(DoublyState),
}

impl State {
    pub fn omega(&self) -> f64 {
        match self {
            State::Simply(s) => s.omega,
            State::Doubly(d) => d.omega,
        }
    }

    pub fn set_omega(&mut self, omega: f64) {
        match self {
            State::Simply(s) => s.omega = omega,
            State::Doubly(d) => d.omega = omega,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            State::Simply(s) => s.alpha,
            State::Doubly(d) => d.alpha,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            State::Simply(s) => s.m,
            State::Doubly(d) => d.m,
        }
    }

    /// Unknown vector: a_k, or outer then inner coefficients.
    pub fn unknowns(&self) -> Vec<f64> {
        match self {
            State::Simply(s) => s.coeffs.clone(),
            State::Doubly(d) => d.packed(),
        }
    }

    pub fn with_unknowns(&self, x: &[f64]) -> Self {
        match self {
            State::Simply(s) => State::Simply(SimplyState { coeffs: x.to_vec(), ..s.clone() }),
            State::Doubly(d) => State::Doubly(d.with_packed(x)),
        }
    }

    /// Leading coefficient(s) used as arclength coordinates: a_1, or (a_{1,1}, a_{2,1}).
    pub fn leading(&self) -> Vec<f64> {
        match self {
            State::Simply(s) => vec![s.coeffs.first().copied().unwrap_or(0.0)],
            State::Doubly(d) => {
                vec![d.outer.first().copied().unwrap_or(0.0), d.inner.first().copied().unwrap_or(0.0)]
            }
        }
    }

    pub fn residual(&self, disc: &Discretization) -> Result<ResidualVector> {
        match self {
            State::Simply(s) => residual_simply(s, disc),
            State::Doubly(d) => {
                let (r1, r2) = residual_doubly(d, disc)?;
                Ok(ResidualVector { sines: r1.sines.into_iter().chain(r2.sines).collect() })
            }
        }
    }
}

/// Sine coefficients of the pointwise error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualVector {
    pub sines: Vec<f64>,
}

impl ResidualVector {
    pub fn max_norm(&self) -> f64 {
        self.sines.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max_i |Σ_k b_k sin(mkθ_i)| over a grid of `nodes` points.
    pub fn grid_norm(&self, m: usize, nodes: usize) -> f64 {
        (0..nodes)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / nodes as f64;
                self.sines
                    .iter()
                    .enumerate()
                    .map(|(k, b)| b * ((m * (k + 1)) as f64 * th).sin())
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// b_k = (2/N) Σ_i s_i sin(mkθ_i), k = 1..M.
pub fn sine_project(samples: &[f64], m: usize, modes: usize) -> ResidualVector {
    let n = samples.len();
    let sines = (1..=modes)
        .map(|k| {
            let f = (m * k) as f64;
            2.0 / n as f64
                * samples
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s * (f * 2.0 * PI * i as f64 / n as f64).sin())
                    .sum::<f64>()
        })
        .collect();
    ResidualVector { sines }
}

struct Samples {
    z: Vec<Complex64>,
    zt: Vec<Complex64>,
    radial: Vec<f64>,
}

fn sample(radius: f64, coeffs: &[f64], m: usize, disc: &Discretization) -> Samples {
    let n = disc.nodes();
    let mut z = Vec::with_capacity(n);
    let mut zt = Vec::with_capacity(n);
    let mut radial = Vec::with_capacity(n);
    for i in 0..n {
        let th = disc.theta(i);
        let (a, b) = cosine_curve(radius, coeffs, m, th);
        z.push(a);
        zt.push(b);
        radial.push(radius + coeffs.iter().enumerate().map(|(k, c)| c * ((m * (k + 1)) as f64 * th).cos()).sum::<f64>());
    }
    Samples { z, zt, radial }
}

const MIN_NODE_SPACING: f64 = 1e-8;

fn check_curve(s: &Samples, label: &str) -> Result<()> {
    let n = s.z.len();
    if let Some(r) = s.radial.iter().find(|r| !(**r > 0.0)) {
        return Err(VstateError::Geometry(format!("{label} boundary reaches the origin (radius {r})")));
    }
    for i in 0..n {
        let d = (s.z[(i + 1) % n] - s.z[i]).norm();
        if !(d > MIN_NODE_SPACING) {
            return Err(VstateError::Geometry(format!("{label} boundary nodes {i} and {} coincide", (i + 1) % n)));
        }
    }
    Ok(())
}

fn kernel(d: Complex64, alpha: f64) -> f64 {
    d.norm_sqr().powf(-0.5 * alpha)
}

/// Fourier coefficients of |2 sin(x/2)|^{−α}, k = 0..=kmax.
pub fn log_sine_kernel_coefficients(alpha: f64, kmax: usize) -> Result<Vec<f64>> {
    let h = 0.5 * alpha;
    let mut c = Vec::with_capacity(kmax + 1);
    c.push(crate::specfun::gamma(1.0 - alpha)? / crate::specfun::gamma(1.0 - h)?.powi(2));
    for k in 0..kmax {
        let kf = k as f64;
        let prev = c[k];
        c.push(prev * (kf + h) / (kf + 1.0 - h));
    }
    Ok(c)
}

type WeightKey = (usize, u64, SelfQuadrature);

fn weight_cache() -> &'static Mutex<HashMap<WeightKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<WeightKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Weights w_d multiplying the integrand at offset d = j − i (mod N); the
/// diagonal weight is never used.
pub fn self_weights(n: usize, alpha: f64, rule: SelfQuadrature) -> Result<Arc<Vec<f64>>> {
    let key = (n, alpha.to_bits(), rule);
    if let Some(w) = weight_cache().lock().expect("weight cache poisoned").get(&key) {
        return Ok(w.clone());
    }
    let w = match rule {
        SelfQuadrature::Trapezoid => vec![1.0 / n as f64; n],
        SelfQuadrature::Product => {
            let half = n / 2;
            let c = log_sine_kernel_coefficients(alpha, half)?;
            (0..n)
                .map(|d| {
                    let x = 2.0 * PI * d as f64 / n as f64;
                    let mut r = c[0];
                    for (k, ck) in c.iter().enumerate().take(half).skip(1) {
                        r += 2.0 * ck * (k as f64 * x).cos();
                    }
                    if n % 2 == 0 {
                        r += c[half] * (half as f64 * x).cos();
                    }
                    r / n as f64 * (2.0 * (0.5 * x).sin()).abs().powf(alpha)
                })
                .collect()
        }
    };
    let w = Arc::new(w);
    weight_cache().lock().expect("weight cache poisoned").insert(key, w.clone());
    Ok(w)
}

/// Σ_{j≠i} w_{j−i} (z_θ(φ_j) − z_θ(θ_i)) / |z(φ_j) − z(θ_i)|^α, approximating
/// (1/2π)∫ (z_φ(φ) − z_θ(θ_i)) / |z(φ) − z(θ_i)|^α dφ.
fn self_sum(s: &Samples, i: usize, alpha: f64, w: &[f64]) -> Complex64 {
    let n = s.z.len();
    let zi = s.z[i];
    let ti = s.zt[i];
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, (zj, tj)) in s.z.iter().zip(&s.zt).enumerate() {
        if j != i {
            acc += (tj - ti) * (kernel(zj - zi, alpha) * w[(j + n - i) % n]);
        }
    }
    acc
}

/// (1/N) Σ_j z_θ(φ_j) / |z(φ_j) − p|^α over another boundary.
fn cross_sum(s: &Samples, p: Complex64, alpha: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (zj, tj) in s.z.iter().zip(&s.zt) {
        acc += tj * kernel(zj - p, alpha);
    }
    acc / s.z.len() as f64
}

fn node_list(disc: &Discretization, full: bool) -> Vec<usize> {
    let count = if full { disc.nodes() } else { disc.nodes() / disc.m };
    (0..count).collect()
}

fn tile(sector: Vec<f64>, n: usize) -> Vec<f64> {
    if sector.len() == n {
        return sector;
    }
    (0..n).map(|i| sector[i % sector.len()]).collect()
}

/// Pointwise error of the disc-type equation at every grid node. With
/// `full = false` only the nodes of one fold sector are computed and the rest
/// are filled in by m-fold symmetry.
pub fn residual_samples_simply(state: &SimplyState, disc: &Discretization, full: bool) -> Result<Vec<f64>> {
    let s = sample(state.radius, &state.coeffs, state.m, disc);
    check_curve(&s, "outer")?;
    let ca = c_alpha(state.alpha)?;
    let w = self_weights(disc.nodes(), state.alpha, disc.rule)?;
    let i_unit = Complex64::i();
    let vals: Vec<f64> = node_list(disc, full)
        .par_iter()
        .map(|&i| {
            let v = state.omega * s.z[i] - ca / i_unit * self_sum(&s, i, state.alpha, &w);
            (v * s.zt[i].conj()).re
        })
        .collect();
    Ok(tile(vals, disc.nodes()))
}

pub fn residual_simply(state: &SimplyState, disc: &Discretization) -> Result<ResidualVector> {
    check_modes(state.coeffs.len(), disc)?;
    let samples = residual_samples_simply(state, disc, false)?;
    Ok(sine_project(&samples, state.m, disc.modes()))
}

fn check_modes(len: usize, disc: &Discretization) -> Result<()> {
    if len > disc.modes() {
        return Err(VstateError::domain(format!(
            "{len} coefficients exceed the {} modes resolved by the grid",
            disc.modes()
        )));
    }
    Ok(())
}

/// Pointwise errors on the outer and inner boundary.
pub fn residual_samples_doubly(state: &DoublyState, disc: &Discretization, full: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let s1 = sample(1.0, &state.outer, state.m, disc);
    let s2 = sample(state.b, &state.inner, state.m, disc);
    check_curve(&s1, "outer")?;
    check_curve(&s2, "inner")?;
    if let Some(i) = (0..disc.nodes()).find(|&i| !(s1.radial[i] > s2.radial[i])) {
        return Err(VstateError::Geometry(format!("boundaries intersect near node {i}")));
    }
    let ca = c_alpha(state.alpha)?;
    let a = state.alpha;
    let ci = ca / Complex64::i();
    let w = self_weights(disc.nodes(), a, disc.rule)?;
    let pairs: Vec<(f64, f64)> = node_list(disc, full)
        .par_iter()
        .map(|&i| {
            let v1 = state.omega * s1.z[i] - ci * self_sum(&s1, i, a, &w) + ci * cross_sum(&s2, s1.z[i], a);
            let v2 = state.omega * s2.z[i] - ci * cross_sum(&s1, s2.z[i], a) + ci * self_sum(&s2, i, a, &w);
            ((v1 * s1.zt[i].conj()).re, (v2 * s2.zt[i].conj()).re)
        })
        .collect();
    let (r1, r2): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok((tile(r1, disc.nodes()), tile(r2, disc.nodes())))
}

pub fn residual_doubly(state: &DoublyState, disc: &Discretization) -> Result<(ResidualVector, ResidualVector)> {
    check_modes(state.outer.len().max(state.inner.len()), disc)?;
    let (r1, r2) = residual_samples_doubly(state, disc, false)?;
    Ok((sine_project(&r1, state.m, disc.modes()), sine_project(&r2, state.m, disc.modes())))
}

/// Smallest distance between an outer and an inner grid node.
pub fn min_boundary_gap(state: &DoublyState, disc: &Discretization) -> f64 {
    let s1 = sample(1.0, &state.outer, state.m, disc);
    let s2 = sample(state.b, &state.inner, state.m, disc);
    s1.z
        .par_iter()
        .map(|p| s2.z.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Smallest distance between non-adjacent nodes of one boundary, a proxy for
/// how close a curve is to touching itself.
pub fn min_self_distance(radius: f64, coeffs: &[f64], m: usize, disc: &Discretization) -> f64 {
    let s = sample(radius, coeffs, m, disc);
    let n = s.z.len();
    let skip = (n / 16).max(2);
    (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    let d = i.abs_diff(j);
                    d.min(n - d) > skip
                })
                .map(|j| (s.z[i] - s.z[j]).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discretization_counts() {
        let d = Discretization::new(6, 10).unwrap();
        assert_eq!(d.nodes(), 640);
        assert_eq!(d.modes(), 31);
        assert!(d.nodes() >= 2 * d.m * d.modes() + 1);
        assert!(Discretization::new(1, 3).is_err());
    }

    #[test]
    fn circle_eval() {
        let s = SimplyState::new(0.5, 3, 0.2, vec![0.0; 4]);
        let (z, zt) = s.eval(0.7);
        assert!((z - Complex64::from_polar(1.0, 0.7)).norm() < 1e-15);
        assert!((zt - Complex64::i() * Complex64::from_polar(1.0, 0.7)).norm() < 1e-15);
    }

    #[test]
    fn symmetries_of_the_parametrisation() {
        let s = SimplyState::new(0.5, 3, 0.2, vec![0.1, -0.02, 0.005]);
        for &t in &[0.1, 0.9, 2.5] {
            assert!((s.eval(-t).0 - s.eval(t).0.conj()).norm() < 1e-15);
            let rot = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
            assert!((s.eval(t + 2.0 * PI / 3.0).0 - rot * s.eval(t).0).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let s = SimplyState::new(0.5, 4, 0.2, vec![0.05, 0.01]);
        let h = 1e-6;
        let t = 0.37;
        let fd = (s.eval(t + h).0 - s.eval(t - h).0) / (2.0 * h);
        assert!((fd - s.eval(t).1).norm() < 1e-8);
    }

    #[test]
    fn projections() {
        let d = Discretization::new(4, 3).unwrap();
        let n = d.nodes();
        let sm: Vec<f64> = (0..n).map(|i| (3.0 * d.theta(i)).sin()).collect();
        let r = sine_project(&sm, 3, d.modes());
        assert!((r.sines[0] - 1.0).abs() < 1e-14 && r.sines[1..].iter().all(|v| v.abs() < 1e-14));
        let cm: Vec<f64> = (0..n).map(|i| (3.0 * d.theta(i)).cos()).collect();
        assert!(sine_project(&cm, 3, d.modes()).max_norm() < 1e-14);
        let mix: Vec<f64> = (0..n).map(|i| (6.0 * d.theta(i)).sin() + 3.0 * (9.0 * d.theta(i)).sin()).collect();
        let r = sine_project(&mix, 3, d.modes());
        assert!((r.sines[1] - 1.0).abs() < 1e-13 && (r.sines[2] - 3.0).abs() < 1e-13);
        assert!(r.sines[0].abs() < 1e-13 && r.sines[3..].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn circle_and_annulus_are_exact() {
        let d = Discretization::new(5, 4).unwrap();
        for om in [-1.0, 0.0, 0.37] {
            let s = SimplyState::new(0.5, 4, om, vec![0.0; d.modes()]);
            assert!(residual_simply(&s, &d).unwrap().max_norm() < 1e-12);
            let a = DoublyState::new(0.7, 0.4, 4, om, vec![0.0; d.modes()], vec![0.0; d.modes()]);
            let (r1, r2) = residual_doubly(&a, &d).unwrap();
            assert!(r1.max_norm() < 1e-12 && r2.max_norm() < 1e-12);
        }
    }

    #[test]
    fn sector_and_full_evaluation_agree() {
        let d = Discretization::new(4, 3).unwrap();
        let s = SimplyState::new(0.6, 3, 0.3, vec![0.05, -0.01, 0.002]);
        let a = residual_samples_simply(&s, &d, false).unwrap();
        let b = residual_samples_simply(&s, &d, true).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn gaps() {
        let d = Discretization::new(4, 4).unwrap();
        let a = DoublyState::new(0.5, 0.5, 4, 0.0, vec![0.0; 3], vec![0.0; 3]);
        assert!((min_boundary_gap(&a, &d) - 0.5).abs() < 1e-14);
        let a = DoublyState::new(0.5, 0.2, 4, 0.0, vec![0.0; 3], vec![0.0; 3]);
        assert!((min_boundary_gap(&a, &d) - 0.8).abs() < 1e-14);
    }

    #[test]
    fn geometry_failures() {
        let d = Discretization::new(4, 3).unwrap();
        let s = SimplyState::new(0.5, 3, 0.3, vec![1.5]);
        assert!(matches!(residual_simply(&s, &d), Err(VstateError::Geometry(_))));
        let a = DoublyState::new(0.5, 0.5, 3, 0.0, vec![-0.3], vec![0.3]);
        assert!(matches!(residual_doubly(&a, &d), Err(VstateError::Geometry(_))));
    }
}
