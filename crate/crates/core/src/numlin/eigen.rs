//! Cyclic Jacobi eigensolver for dense self-adjoint matrices.
//!
//! Each sweep visits every off-diagonal pair `(p, q)` and applies the plane
//! rotation that annihilates `a[p][q]`. The accumulated rotations form the
//! eigenvector basis. Iteration stops once the off-diagonal Frobenius mass is
//! at most `1e-14 * ‖A‖_F`.

use nalgebra::{Complex, DMatrix};

use super::SymMatrix;

const OFF_DIAGONAL_RTOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = basis · diag(values) · basisᵀ`, values ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub basis: DMatrix<f64>,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Spectral norm of the decomposed matrix.
    pub fn norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Rebuilds `basis · diag(f(λ)) · basisᵀ`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> DMatrix<f64> {
        let n = self.values.len();
        let mut scaled = self.basis.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            scaled.column_mut(j).scale_mut(fj);
        }
        &scaled * self.basis.transpose()
    }
}

/// Eigendecomposition of a self-adjoint matrix by cyclic Jacobi rotations.
pub fn sym_eig(a: &SymMatrix) -> SymEigen {
    jacobi(a.as_matrix())
}

/// Jacobi on a raw square matrix; only the symmetric part is read.
pub(crate) fn jacobi(a: &DMatrix<f64>) -> SymEigen {
    let n = a.nrows();
    // Row-major working copy, symmetrized.
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let frob: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = OFF_DIAGONAL_RTOL * frob;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * w[p * n + q] * w[p * n + q];
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // A <- Jᵀ A J, touching rows and columns p, q.
                for k in 0..n {
                    let akp = w[k * n + p];
                    let akq = w[k * n + q];
                    w[k * n + p] = c * akp - s * akq;
                    w[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = w[p * n + k];
                    let aqk = w[q * n + k];
                    w[p * n + k] = c * apk - s * aqk;
                    w[q * n + k] = s * apk + c * aqk;
                }
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[i * n + i].total_cmp(&w[j * n + j]));
    let values = order.iter().map(|&i| w[i * n + i]).collect();
    let basis = DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    SymEigen { values, basis }
}

/// Eigenvalues (ascending) of a complex Hermitian matrix.
///
/// `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled.
pub fn herm_eigenvalues(h: &DMatrix<Complex<f64>>) -> Vec<f64> {
    let n = h.nrows();
    let mut emb = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            // Hermitian part only.
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            emb[(i, j)] = z.re;
            emb[(i + n, j + n)] = z.re;
            emb[(i, j + n)] = -z.im;
            emb[(i + n, j)] = z.im;
        }
    }
    let eig = jacobi(&emb);
    eig.values.iter().step_by(2).copied().collect()
}
