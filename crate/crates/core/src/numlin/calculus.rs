use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Contraction, MatrixTuple, SymMatrix, DEFAULT_COMMUTE_TOL};
use crate::error::{Error, Result};

const JOINT_DIAG_RESIDUE: f64 = 1e-8;
// Fixed seed for the generic linear combination used in joint diagonalization.
const COMBINATION_SEED: u64 = 0x6a6f_696e_7464_6961;

/// Functional calculus on a commuting tuple: `U f(Λ) Uᵀ` where `X = U Λ Uᵀ`
/// jointly. For a single matrix this is the ordinary spectral calculus.
pub fn apply_scalar_function<F>(f: F, x: &MatrixTuple) -> Result<SymMatrix>
where
    F: Fn(&[f64]) -> f64,
{
    let k = x.arity();
    let n = x.dim();
    let basis = if k == 1 {
        x.get(0).eig().basis
    } else {
        let residual = x.max_commutator();
        let scale = x.items().iter().map(|m| m.as_matrix().norm()).fold(0.0, f64::max);
        let bound = DEFAULT_COMMUTE_TOL * scale * scale;
        if residual > bound {
            return Err(Error::NotCommuting { residual, bound });
        }
        joint_basis(x)?
    };

    let mut values = Vec::with_capacity(n);
    let diagonals: Vec<DMatrix<f64>> =
        x.items().iter().map(|m| basis.transpose() * m.as_matrix() * &basis).collect();
    for j in 0..n {
        let point: Vec<f64> = diagonals.iter().map(|d| d[(j, j)]).collect();
        let v = f(&point);
        if !v.is_finite() {
            return Err(Error::FunctionUndefined { point });
        }
        values.push(v);
    }
    let mut scaled = basis.clone();
    for (j, v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*v);
    }
    Ok(SymMatrix::symmetrized(scaled * basis.transpose()))
}

/// Eigenbasis of a generic linear combination, verified to diagonalize every
/// coordinate. A second combination is tried if the first fails.
fn joint_basis(x: &MatrixTuple) -> Result<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(COMBINATION_SEED);
    let mut worst = f64::INFINITY;
    for _attempt in 0..2 {
        let mut combo = DMatrix::zeros(x.dim(), x.dim());
        for item in x.items() {
            let c: f64 = rng.random_range(0.5..1.5);
            let s = item.as_matrix().norm().max(f64::MIN_POSITIVE);
            combo += item.as_matrix() * (c / s);
        }
        let basis = super::eigen::jacobi(&combo).basis;
        worst = 0.0;
        for item in x.items() {
            let d = basis.transpose() * item.as_matrix() * &basis;
            let scale = item.as_matrix().norm().max(1.0);
            let mut off = 0.0;
            for i in 0..d.nrows() {
                for j in 0..d.ncols() {
                    if i != j {
                        off += d[(i, j)] * d[(i, j)];
                    }
                }
            }
            worst = f64::max(worst, off.sqrt() / scale);
        }
        if worst <= JOINT_DIAG_RESIDUE {
            return Ok(basis);
        }
    }
    Err(Error::JointDiagonalization { residue: worst })
}

/// Principal square root of a PSD matrix; eigenvalues in `[-tol·max(1,λ_max), 0)` are clamped.
pub fn psd_sqrt(a: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let eig = a.eig();
    let bound = tol * eig.max().max(1.0);
    if eig.min() < -bound {
        return Err(Error::NotPsd { min_eigenvalue: eig.min(), bound });
    }
    Ok(SymMatrix::symmetrized(eig.map(|x| x.max(0.0).sqrt())))
}

/// Moore–Penrose inverse of a PSD matrix. Eigenvalues at or below
/// `rank_tol · λ_max` are treated as zero.
pub fn pinv_psd(a: &SymMatrix, rank_tol: f64, tol: f64) -> Result<SymMatrix> {
    let eig = a.eig();
    let bound = tol * eig.max().max(1.0);
    if eig.min() < -bound {
        return Err(Error::NotPsd { min_eigenvalue: eig.min(), bound });
    }
    let cut = rank_tol * eig.max().max(0.0);
    Ok(SymMatrix::symmetrized(eig.map(|x| if x > cut && x > 0.0 { 1.0 / x } else { 0.0 })))
}

/// Inverse of a positive definite matrix through its eigendecomposition.
pub fn inverse_pd(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = a.eig();
    if eig.min() <= 0.0 {
        return Err(Error::NotPd { min_eigenvalue: eig.min() });
    }
    Ok(SymMatrix::symmetrized(eig.map(|x| 1.0 / x)))
}

/// Unitary dilation of a contraction `W: ℝⁿ → ℝᵐ`:
///
/// ```text
/// U = [[ W,              (I − WWᵀ)^{1/2} ],
///      [ (I − WᵀW)^{1/2}, −Wᵀ            ]]
/// ```
///
/// `U` maps `ℝⁿ ⊕ ℝᵐ` onto `ℝᵐ ⊕ ℝⁿ` and is orthogonal.
pub fn unitary_dilation(w: &Contraction) -> Result<DMatrix<f64>> {
    let wm = w.as_matrix();
    let (m, n) = wm.shape();
    let left_defect = SymMatrix::new(DMatrix::identity(m, m) - wm * wm.transpose())?;
    let right_defect = SymMatrix::new(DMatrix::identity(n, n) - wm.transpose() * wm)?;
    let norm_sq = 1.0 - right_defect.eig().min();
    if norm_sq > (1.0 + 1e-12) * (1.0 + 1e-12) {
        return Err(Error::NotContraction { norm: norm_sq.sqrt() });
    }
    // Defect eigenvalues at roundoff level are exact zeros; their square
    // roots would otherwise be of order 1e-8.
    let floor = 8.0 * f64::EPSILON * (m + n) as f64;
    let root = |x: f64| if x <= floor { 0.0 } else { x.sqrt() };
    let dl = left_defect.eig().map(root);
    let dr = right_defect.eig().map(root);

    let mut u = DMatrix::zeros(m + n, n + m);
    u.view_mut((0, 0), (m, n)).copy_from(wm);
    u.view_mut((0, n), (m, m)).copy_from(&dl);
    u.view_mut((m, 0), (n, n)).copy_from(&dr);
    u.view_mut((m, n), (n, m)).copy_from(&(-wm.transpose()));
    Ok(u)
}

/// Weighted geometric mean `X #_t A = X^{1/2} (X^{-1/2} A X^{-1/2})^t X^{1/2}`
/// evaluated through eigendecompositions.
pub fn geometric_mean_direct(x: &SymMatrix, a: &SymMatrix, t: f64) -> Result<SymMatrix> {
    if x.dim() != a.dim() {
        return Err(Error::Dimension(format!("{} vs {}", x.dim(), a.dim())));
    }
    let eig = x.eig();
    if eig.min() <= 0.0 {
        return Err(Error::NotPd { min_eigenvalue: eig.min() });
    }
    let half = eig.map(f64::sqrt);
    let inv_half = eig.map(|v| 1.0 / v.sqrt());
    let inner = SymMatrix::symmetrized(&inv_half * a.as_matrix() * &inv_half);
    let inner_eig = inner.eig();
    if inner_eig.min() <= 0.0 {
        return Err(Error::NotPd { min_eigenvalue: inner_eig.min() });
    }
    let powered = inner_eig.map(|v| v.powf(t));
    Ok(SymMatrix::symmetrized(&half * powered * &half))
}
