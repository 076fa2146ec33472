//! Discretization of `xᵗ = (sin tπ / π) ∫₀^∞ λ^{t−1} x/(λ+x) dλ`.
//!
//! The half line is mapped to `(0, 1)` by `λ = c·(s/(1−s))^p` with
//! `p = 1/min(t, 1−t)` and `c` the geometric centre of the target spectral
//! interval, then integrated by Gauss–Legendre. The power `p` makes the
//! transformed integrand vanish smoothly at both ends of `(0, 1)`, so the rule
//! converges geometrically in the node count.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default target spectral interval.
pub const DEFAULT_INTERVAL: (f64, f64) = (1e-2, 1e2);
/// Default node count.
pub const DEFAULT_NODES: usize = 96;
pub const MIN_NODES: usize = 8;

/// `f(x) ≈ Σ_j weights[j] · x / (nodes[j] + x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureScheme {
    /// Scheme for `x ↦ xᵗ`, `t ∈ (0, 1)`, tuned to spectra in `interval`.
    pub fn power(t: f64, n: usize, interval: (f64, f64)) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("exponent t = {t} must lie in (0, 1)")));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidParameter(format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        let (a, b) = interval;
        if !(a > 0.0 && b >= a && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("spectral interval {interval:?} must lie in (0, ∞)")));
        }
        let c = (a * b).sqrt();
        let p = 1.0 / t.min(1.0 - t);
        let k = (t * PI).sin() / PI;
        let (s, w) = gauss_legendre_unit(n);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&sj, &wj) in s.iter().zip(&w) {
            let u = sj / (1.0 - sj);
            let lambda = c * u.powf(p);
            let dlambda = c * p * u.powf(p - 1.0) / ((1.0 - sj) * (1.0 - sj));
            nodes.push(lambda);
            weights.push(k * wj * lambda.powf(t - 1.0) * dlambda);
        }
        Ok(QuadratureScheme { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Scalar value of the discretized integral.
    pub fn eval(&self, x: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&l, &w)| w * x / (l + x)).sum()
    }
}

/// Gauss–Legendre nodes (increasing) and weights on `(0, 1)`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let nodes = x.iter().map(|&xi| 0.5 * (1.0 + xi)).collect();
    let weights = w.iter().map(|&wi| 0.5 * wi).collect();
    (nodes, weights)
}

/// Gauss–Legendre nodes (increasing) and weights on `(−1, 1)` by Newton
/// iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
