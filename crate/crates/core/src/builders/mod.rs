//! Realization factory for a library of operator monotone functions and means.
//!
//! Quadrature builders sum Cauchy-type atoms into an arrowhead pencil: one
//! shared pivot coordinate plus one auxiliary coordinate per node. Shorting an
//! arrowhead whose off-pivot part is block diagonal yields the sum of the
//! atoms' Schur complements, so the sum is exact for any node count.

pub mod quadrature;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numlin::SymMatrix;
use crate::pencil::PencilRealization;

pub use quadrature::{QuadratureScheme, DEFAULT_INTERVAL, DEFAULT_NODES};

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `X ↦ X_i` among `k` variables (0-based `i`).
    IdentityCoordinate { i: usize, k: usize },
    Constant(f64),
    Affine { alpha: f64, beta: Vec<f64> },
    Cauchy(f64),
    Sqrt,
    Power(f64),
    WeightedHarmonic(Vec<f64>),
    WeightedArithmetic(Vec<f64>),
    GeometricMean(f64),
}

/// Node count and target spectral interval for the quadrature builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub nodes: usize,
    pub interval: (f64, f64),
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { nodes: DEFAULT_NODES, interval: DEFAULT_INTERVAL }
    }
}

impl FunctionSpec {
    pub fn arity(&self) -> usize {
        match self {
            FunctionSpec::IdentityCoordinate { k, .. } => *k,
            FunctionSpec::Constant(_) | FunctionSpec::Cauchy(_) | FunctionSpec::Sqrt | FunctionSpec::Power(_) => 1,
            FunctionSpec::Affine { beta, .. } => beta.len(),
            FunctionSpec::WeightedHarmonic(w) | FunctionSpec::WeightedArithmetic(w) => w.len(),
            FunctionSpec::GeometricMean(_) => 2,
        }
    }

    /// Closed-form scalar value at a point of `(0, ∞)ᵏ`.
    pub fn scalar(&self, x: &[f64]) -> f64 {
        match self {
            FunctionSpec::IdentityCoordinate { i, .. } => x[*i],
            FunctionSpec::Constant(c) => *c,
            FunctionSpec::Affine { alpha, beta } => alpha + beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>(),
            FunctionSpec::Cauchy(l) => l * x[0] / (l + x[0]),
            FunctionSpec::Sqrt => x[0].sqrt(),
            FunctionSpec::Power(t) => x[0].powf(*t),
            FunctionSpec::WeightedHarmonic(w) => 1.0 / w.iter().zip(x).map(|(wi, v)| wi / v).sum::<f64>(),
            FunctionSpec::WeightedArithmetic(w) => w.iter().zip(x).map(|(wi, v)| wi * v).sum(),
            FunctionSpec::GeometricMean(t) => x[0].powf(1.0 - t) * x[1].powf(*t),
        }
    }

    pub fn build(&self, opts: &BuildOptions) -> Result<PencilRealization> {
        match self {
            FunctionSpec::IdentityCoordinate { i, k } => identity_coordinate(*i, *k),
            FunctionSpec::Constant(c) => constant(*c),
            FunctionSpec::Affine { alpha, beta } => affine(*alpha, beta),
            FunctionSpec::Cauchy(l) => cauchy_atom(*l),
            FunctionSpec::Sqrt => power(0.5, opts),
            FunctionSpec::Power(t) => power(*t, opts),
            FunctionSpec::WeightedHarmonic(w) => weighted_harmonic(w),
            FunctionSpec::WeightedArithmetic(w) => weighted_arithmetic(w),
            FunctionSpec::GeometricMean(t) => geometric_mean(*t, opts),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            FunctionSpec::IdentityCoordinate { i, k } if *k == 1 && *i == 0 => write!(f, "identity"),
            FunctionSpec::IdentityCoordinate { i, k } => write!(f, "coord:{i},{k}"),
            FunctionSpec::Constant(c) => write!(f, "constant:{c}"),
            FunctionSpec::Affine { alpha, beta } => write!(f, "affine:{alpha},{}", list(beta)),
            FunctionSpec::Cauchy(l) => write!(f, "cauchy:{l}"),
            FunctionSpec::Sqrt => write!(f, "sqrt"),
            FunctionSpec::Power(t) => write!(f, "power:{t}"),
            FunctionSpec::WeightedHarmonic(w) => write!(f, "harmonic:{}", list(w)),
            FunctionSpec::WeightedArithmetic(w) => write!(f, "arithmetic:{}", list(w)),
            FunctionSpec::GeometricMean(t) => write!(f, "geomean:{t}"),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    /// Parses the `name[:params]` grammar written by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p)),
            None => (s.trim(), None),
        };
        let list = || -> Result<Vec<f64>> {
            let p = params.ok_or_else(|| Error::InvalidParameter(format!("'{name}' needs parameters")))?;
            p.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number '{x}' in '{s}'"))))
                .collect()
        };
        let one = || -> Result<f64> {
            match list()?.as_slice() {
                [x] => Ok(*x),
                v => Err(Error::InvalidParameter(format!("'{name}' takes one parameter, got {}", v.len()))),
            }
        };
        let none = |spec: FunctionSpec| match params {
            None => Ok(spec),
            Some(_) => Err(Error::InvalidParameter(format!("'{name}' takes no parameters"))),
        };
        match name {
            "identity" => none(FunctionSpec::IdentityCoordinate { i: 0, k: 1 }),
            "sqrt" => none(FunctionSpec::Sqrt),
            "constant" => Ok(FunctionSpec::Constant(one()?)),
            "cauchy" => Ok(FunctionSpec::Cauchy(one()?)),
            "power" => Ok(FunctionSpec::Power(one()?)),
            "geomean" => Ok(FunctionSpec::GeometricMean(one()?)),
            "harmonic" => Ok(FunctionSpec::WeightedHarmonic(list()?)),
            "arithmetic" => Ok(FunctionSpec::WeightedArithmetic(list()?)),
            "affine" => {
                let v = list()?;
                Ok(FunctionSpec::Affine { alpha: v[0], beta: v[1..].to_vec() })
            }
            "coord" => {
                let p = params.unwrap_or_default();
                let idx: Vec<usize> = p.split(',').filter_map(|x| x.trim().parse().ok()).collect();
                match idx.as_slice() {
                    [i, k] if p.split(',').count() == 2 => Ok(FunctionSpec::IdentityCoordinate { i: *i, k: *k }),
                    _ => Err(Error::InvalidParameter(format!("'coord' takes two indices i,k, got '{p}'"))),
                }
            }
            _ => Err(Error::InvalidParameter(format!("unknown function '{name}'"))),
        }
    }
}

fn e1(m: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[0] = 1.0;
    e
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() || w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!("weights {w:?} must be positive")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-12 * w.len() as f64 {
        return Err(Error::InvalidParameter(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

pub fn identity_coordinate(i: usize, k: usize) -> Result<PencilRealization> {
    if i >= k {
        return Err(Error::InvalidParameter(format!("coordinate {i} out of range for {k} variables")));
    }
    let a = (0..k).map(|j| SymMatrix::scalar(1, if j == i { 1.0 } else { 0.0 })).collect();
    PencilRealization::new(vec![1.0], SymMatrix::zeros(1), a)
}

/// `X ↦ c·I` as a one-variable realization.
pub fn constant(c: f64) -> Result<PencilRealization> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("constant {c} must be positive")));
    }
    PencilRealization::new(vec![1.0], SymMatrix::scalar(1, c), vec![SymMatrix::zeros(1)])
}

/// `X ↦ α·I + Σ β_i X_i`.
pub fn affine(alpha: f64, beta: &[f64]) -> Result<PencilRealization> {
    arrowhead_sum(&[], alpha, beta)
}

/// `x ↦ λx/(λ+x)` as the short of `[[x, x], [x, x+λ]]`.
pub fn cauchy_atom(lambda: f64) -> Result<PencilRealization> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("Cauchy parameter {lambda} must be positive")));
    }
    let a0 = SymMatrix::from_row_slice(2, &[0.0, 0.0, 0.0, lambda])?;
    let a1 = SymMatrix::from_row_slice(2, &[1.0, 1.0, 1.0, 1.0])?;
    PencilRealization::new(e1(2), a0, vec![a1])
}

/// Sum of realizations plus an affine part `α·I + Σ β_i X_i`.
///
/// Atoms are taken in their rotated coordinates (`e = e₁`), so the leading
/// coordinate is the shared pivot and the rest are stacked block diagonally.
/// An empty `beta` means zero linear part.
pub fn arrowhead_sum(atoms: &[PencilRealization], alpha: f64, beta: &[f64]) -> Result<PencilRealization> {
    let k = match (atoms.first(), beta.len()) {
        (Some(a), _) => a.arity(),
        (None, 0) => return Err(Error::InvalidParameter("empty sum without a linear part".into())),
        (None, len) => len,
    };
    if atoms.iter().any(|a| a.arity() != k) {
        return Err(Error::Dimension("atoms disagree on the number of variables".into()));
    }
    if !beta.is_empty() && beta.len() != k {
        return Err(Error::Dimension(format!("{} linear coefficients for {k} variables", beta.len())));
    }
    if !(alpha >= 0.0) || beta.iter().any(|&b| !(b >= 0.0)) {
        return Err(Error::InvalidParameter("affine coefficients must be nonnegative".into()));
    }
    let m = 1 + atoms.iter().map(|a| a.aux_dim() - 1).sum::<usize>();
    let mut a0 = DMatrix::zeros(m, m);
    let mut a: Vec<DMatrix<f64>> = vec![DMatrix::zeros(m, m); k];
    a0[(0, 0)] = alpha;
    for (i, &b) in beta.iter().enumerate() {
        a[i][(0, 0)] = b;
    }
    let mut offset = 1;
    for atom in atoms {
        let (r0, ri) = atom.rotated();
        place(&mut a0, r0, offset);
        for (dst, src) in a.iter_mut().zip(ri) {
            place(dst, src, offset);
        }
        offset += atom.aux_dim() - 1;
    }
    let a0 = SymMatrix::new(a0)?;
    let a = a.into_iter().map(SymMatrix::new).collect::<Result<Vec<_>>>()?;
    PencilRealization::new(e1(m), a0, a)
}

/// Adds `src` into `dst`: pivot entry to pivot entry, auxiliary block at `offset`.
fn place(dst: &mut DMatrix<f64>, src: &DMatrix<f64>, offset: usize) {
    let r = src.nrows() - 1;
    dst[(0, 0)] += src[(0, 0)];
    for p in 0..r {
        dst[(0, offset + p)] += src[(0, 1 + p)];
        dst[(offset + p, 0)] += src[(1 + p, 0)];
        for q in 0..r {
            dst[(offset + p, offset + q)] += src[(1 + p, 1 + q)];
        }
    }
}

/// `x ↦ xᵗ` from the quadrature scheme.
///
/// Node `(λ, W)` contributes `W x/(λ+x) = (W/λ)(λ : x)`. Below the centre `c`
/// of the target interval it is laid out as the short of
/// `[[W, W], [W, W + (W/λ)x]]`, above it as the short of
/// `(W/λ)[[x, x], [x, x + λ]]`. Either way the pivot entry exceeds the atom's
/// value by a factor at most `1 + √(b/a)` on `[a, b]`, which bounds
/// cancellation in the Schur complement.
pub fn power(t: f64, opts: &BuildOptions) -> Result<PencilRealization> {
    let q = QuadratureScheme::power(t, opts.nodes, opts.interval)?;
    let centre = (opts.interval.0 * opts.interval.1).sqrt();
    let atoms = q
        .nodes
        .iter()
        .zip(&q.weights)
        .map(|(&l, &w)| {
            let s = w / l;
            let (a0, a1) = if l < centre {
                ([w, w, w, w], [0.0, 0.0, 0.0, s])
            } else {
                ([0.0, 0.0, 0.0, w], [s, s, s, s])
            };
            PencilRealization::new(e1(2), SymMatrix::from_row_slice(2, &a0)?, vec![SymMatrix::from_row_slice(2, &a1)?])
        })
        .collect::<Result<Vec<_>>>()?;
    arrowhead_sum(&atoms, 0.0, &[])
}

pub fn sqrt(opts: &BuildOptions) -> Result<PencilRealization> {
    power(0.5, opts)
}

/// `(Σ w_i X_i⁻¹)⁻¹`, exact.
pub fn weighted_harmonic(w: &[f64]) -> Result<PencilRealization> {
    check_weights(w)?;
    let k = w.len();
    let e = vec![1.0 / (k as f64).sqrt(); k];
    let a = (0..k)
        .map(|i| {
            let mut d = vec![0.0; k];
            d[i] = 1.0 / (k as f64 * w[i]);
            SymMatrix::from_diagonal(&d)
        })
        .collect();
    PencilRealization::new(e, SymMatrix::zeros(k), a)
}

/// `Σ w_i X_i`, exact.
pub fn weighted_arithmetic(w: &[f64]) -> Result<PencilRealization> {
    check_weights(w)?;
    let a = w.iter().map(|&wi| SymMatrix::scalar(1, wi)).collect();
    PencilRealization::new(vec![1.0], SymMatrix::zeros(1), a)
}

/// Weighted geometric mean `X₁ #_t X₂` from the quadrature of `xᵗ`.
///
/// Node `(λ, W)` contributes `(W/λ)(λX₁ : X₂)`, the short of
/// `[[W X₁, W X₁], [W X₁, W X₁ + (W/λ) X₂]]` below the interval centre and of
/// `(W/λ)[[X₂, X₂], [X₂, X₂ + λX₁]]` above it. The target interval refers to
/// the spectrum of `X₁^{-1/2} X₂ X₁^{-1/2}`.
pub fn geometric_mean(t: f64, opts: &BuildOptions) -> Result<PencilRealization> {
    let q = QuadratureScheme::power(t, opts.nodes, opts.interval)?;
    let centre = (opts.interval.0 * opts.interval.1).sqrt();
    let atoms = q
        .nodes
        .iter()
        .zip(&q.weights)
        .map(|(&l, &w)| {
            let s = w / l;
            let (a1, a2) = if l < centre {
                ([w, w, w, w], [0.0, 0.0, 0.0, s])
            } else {
                ([0.0, 0.0, 0.0, w], [s, s, s, s])
            };
            let a = vec![SymMatrix::from_row_slice(2, &a1)?, SymMatrix::from_row_slice(2, &a2)?];
            PencilRealization::new(e1(2), SymMatrix::zeros(2), a)
        })
        .collect::<Result<Vec<_>>>()?;
    arrowhead_sum(&atoms, 0.0, &[])
}
