//! Seeded generators for test inputs. Every generator is a pure function of
//! its seed (or of the state of the `ChaCha8Rng` it is handed).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Contraction, MatrixTuple, SymMatrix};
use crate::error::{Error, Result};

pub type TestRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut TestRng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal(n: usize, rng: &mut TestRng) -> DMatrix<f64> {
    orthonormal_columns(n, n, rng)
}

fn orthonormal_columns(m: usize, n: usize, rng: &mut TestRng) -> DMatrix<f64> {
    let g = gaussian_matrix(m, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random symmetric matrix with eigenvalues drawn uniformly from `interval`.
pub fn random_pd(n: usize, interval: (f64, f64), rng: &mut TestRng) -> SymMatrix {
    let q = random_orthogonal(n, rng);
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(interval.0..=interval.1)).collect();
    with_spectrum(&q, &d)
}

/// Random PSD matrix `G Gᵀ` of the given rank, scaled by `1 / n`.
pub fn random_psd(n: usize, rank: usize, rng: &mut TestRng) -> SymMatrix {
    let g = gaussian_matrix(n, rank, rng);
    SymMatrix::symmetrized(&g * g.transpose() / n as f64)
}

/// Random symmetric (indefinite) matrix with entries of unit scale.
pub fn random_symmetric(n: usize, rng: &mut TestRng) -> SymMatrix {
    let g = gaussian_matrix(n, n, rng);
    SymMatrix::symmetrized((&g + g.transpose()) * 0.5)
}

/// `Q · diag(d) · Qᵀ`.
pub fn with_spectrum(q: &DMatrix<f64>, d: &[f64]) -> SymMatrix {
    let dm = DMatrix::from_diagonal(&DVector::from_column_slice(d));
    SymMatrix::symmetrized(q * dm * q.transpose())
}

/// Independent random PD matrices, one per coordinate; not commuting.
pub fn random_pd_tuple(k: usize, n: usize, interval: (f64, f64), rng: &mut TestRng) -> MatrixTuple {
    let items = (0..k).map(|_| random_pd(n, interval, rng)).collect();
    MatrixTuple::new(items).expect("k >= 1")
}

/// Commuting tuple: one shared random orthogonal basis and independent
/// uniform eigenvalue tuples inside `interval`.
pub fn random_commuting_tuple(k: usize, n: usize, interval: (f64, f64), seed: u64) -> Result<MatrixTuple> {
    if !(interval.0 > 0.0 && interval.1 >= interval.0) {
        return Err(Error::InvalidParameter(format!("spectrum interval {interval:?} must lie in (0, ∞)")));
    }
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("k and n must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok(commuting_tuple_with(k, n, interval, &mut rng))
}

pub(crate) fn commuting_tuple_with(k: usize, n: usize, interval: (f64, f64), rng: &mut TestRng) -> MatrixTuple {
    let q = random_orthogonal(n, rng);
    let items = (0..k)
        .map(|_| {
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(interval.0..=interval.1)).collect();
            with_spectrum(&q, &d)
        })
        .collect();
    MatrixTuple::new(items).expect("k >= 1").with_commuting_flag(true)
}

/// Shifts `X` down so that `X′_i ⪯ Y_i − margin·I` coordinatewise.
///
/// `X′_i = X_i − t_i I` with `t_i = max(0, λ_max(X_i − Y_i)) + margin`. If any
/// `X′_i` is no longer positive definite, the same positive multiple of the
/// identity is added to every coordinate of both tuples. Scalar shifts keep
/// the commuting flags of both sides.
pub fn make_dominated_pair(x: &MatrixTuple, y: &MatrixTuple, margin: f64) -> Result<(MatrixTuple, MatrixTuple)> {
    if x.arity() != y.arity() || x.dim() != y.dim() {
        return Err(Error::Dimension(format!(
            "tuples of shape ({}, {}) and ({}, {})",
            x.arity(),
            x.dim(),
            y.arity(),
            y.dim()
        )));
    }
    let mut shifted = Vec::with_capacity(x.arity());
    for (xi, yi) in x.items().iter().zip(y.items()) {
        let t = xi.sub(yi).eig().max().max(0.0) + margin;
        shifted.push(xi.shift(-t));
    }
    let lowest = shifted.iter().map(|m| m.min_eigenvalue()).fold(f64::INFINITY, f64::min);
    let lift = if lowest <= 0.0 { margin - lowest } else { 0.0 };
    let (xs, ys): (Vec<_>, Vec<_>) = if lift > 0.0 {
        (
            shifted.iter().map(|m| m.shift(lift)).collect(),
            y.items().iter().map(|m| m.shift(lift)).collect(),
        )
    } else {
        (shifted, y.items().to_vec())
    };
    let xp = MatrixTuple::new(xs)?.with_commuting_flag(x.is_commuting());
    let yp = MatrixTuple::new(ys)?.with_commuting_flag(y.is_commuting());
    Ok((xp, yp))
}

/// Isometry `ℝⁿ → ℝᵐ` from orthonormalizing a Gaussian `m × n` matrix.
pub fn random_isometry(n: usize, m: usize, seed: u64) -> Result<Contraction> {
    let mut rng = rng_from_seed(seed);
    isometry_with(n, m, &mut rng)
}

pub(crate) fn isometry_with(n: usize, m: usize, rng: &mut TestRng) -> Result<Contraction> {
    if m < n {
        return Err(Error::Dimension(format!("no isometry from dimension {n} into {m}")));
    }
    Contraction::new(orthonormal_columns(m, n, rng))
}

/// A Gaussian `m × n` matrix rescaled to operator norm uniform in `[0.5, 1]`.
pub fn random_contraction(n: usize, m: usize, seed: u64) -> Result<Contraction> {
    let mut rng = rng_from_seed(seed);
    contraction_with(n, m, &mut rng)
}

pub(crate) fn contraction_with(n: usize, m: usize, rng: &mut TestRng) -> Result<Contraction> {
    let g = gaussian_matrix(m, n, rng);
    let norm = g.singular_values().max();
    let target: f64 = rng.random_range(0.5..=1.0);
    // keep a hair below 1 so rounding never pushes the norm over the bound
    Contraction::new(g * (target * (1.0 - 1e-14) / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::loewner_leq;

    #[test]
    fn commuting_tuple_is_deterministic_and_commutes() {
        let a = random_commuting_tuple(3, 4, (0.5, 2.0), 42).unwrap();
        let b = random_commuting_tuple(3, 4, (0.5, 2.0), 42).unwrap();
        assert_eq!(a, b);
        assert!(a.is_commuting());
        let scale = a.items().iter().map(|m| m.norm()).fold(0.0, f64::max);
        assert!(a.max_commutator() <= 1e-12 * scale * scale);
        for m in a.items() {
            let eig = m.eig();
            assert!(eig.min() >= 0.5 - 1e-12 && eig.max() <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn single_commuting_tuple_is_pd() {
        let a = random_commuting_tuple(1, 3, (0.1, 1.0), 1).unwrap();
        assert!(a.get(0).min_eigenvalue() > 0.0);
    }

    #[test]
    fn bad_interval_is_refused() {
        assert!(random_commuting_tuple(1, 2, (-1.0, 1.0), 0).is_err());
    }

    #[test]
    fn dominated_pair_examples() {
        let x = MatrixTuple::single(SymMatrix::from_diagonal(&[3.0]));
        let y = MatrixTuple::single(SymMatrix::from_diagonal(&[1.0]));
        let (xp, yp) = make_dominated_pair(&x, &y, 0.1).unwrap();
        assert!((xp.get(0).as_matrix()[(0, 0)] - 0.9).abs() < 1e-15);
        assert_eq!(yp, y);

        let a = random_commuting_tuple(2, 3, (1.0, 2.0), 5).unwrap();
        let (ap, _) = make_dominated_pair(&a, &a, 0.25).unwrap();
        for (p, q) in ap.items().iter().zip(a.items()) {
            assert!((p.as_matrix() - q.shift(-0.25).as_matrix()).norm() < 1e-14);
        }
        assert!(ap.is_commuting());
    }

    #[test]
    fn dominated_pair_lifts_out_of_the_cone() {
        let x = MatrixTuple::single(SymMatrix::from_diagonal(&[5.0, 1.0]));
        let y = MatrixTuple::single(SymMatrix::from_diagonal(&[0.2, 0.2]));
        let (xp, yp) = make_dominated_pair(&x, &y, 0.05).unwrap();
        assert!(xp.get(0).min_eigenvalue() > 0.0);
        assert!(loewner_leq(xp.get(0), yp.get(0), 0.0).unwrap());
    }

    #[test]
    fn isometry_and_contraction() {
        let w = random_isometry(3, 3, 8).unwrap();
        assert!(w.is_isometry());
        let w = random_isometry(2, 5, 8).unwrap();
        let gram = w.as_matrix().transpose() * w.as_matrix();
        assert!((gram - DMatrix::identity(2, 2)).norm() <= 1e-12);
        assert!(random_isometry(3, 2, 0).is_err());
        let c = random_contraction(3, 4, 2).unwrap();
        assert!(c.as_matrix().singular_values().max() <= 1.0);
    }
}
