//! Dense self-adjoint linear algebra: the matrix types shared by every other
//! module, Loewner-order predicates, functional calculus and the seeded
//! generators used by the property suites.

mod calculus;
mod eigen;
pub mod random;

use nalgebra::{Complex, DMatrix};
use num_traits::Zero;

use crate::error::{Error, Result};

pub use calculus::{
    apply_scalar_function, geometric_mean_direct, inverse_pd, pinv_psd, psd_sqrt, unitary_dilation,
};
pub use eigen::{herm_eigenvalues, sym_eig, SymEigen};

/// Complex dense matrix.
pub type CMatrix = DMatrix<Complex<f64>>;

/// Default relative tolerance for positive-semidefiniteness checks.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// Default relative commutator tolerance for commuting tuples.
pub const DEFAULT_COMMUTE_TOL: f64 = 1e-10;

/// A dense real symmetric matrix. Symmetry is exact: construction averages
/// the input with its transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::Dimension("matrix dimension must be at least 1".into()));
        }
        Ok(Self::symmetrized(m))
    }

    /// Caller guarantees squareness.
    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        SymMatrix(out)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        SymMatrix(DMatrix::identity(n, n) * c)
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        SymMatrix(DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 }))
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(format!("expected {} entries, got {}", n * n, data.len())));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn eig(&self) -> SymEigen {
        sym_eig(self)
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        self.eig().norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().min()
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix::symmetrized(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix::symmetrized(&self.0 - &other.0)
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix(&self.0 * c)
    }

    pub fn shift(&self, c: f64) -> SymMatrix {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)] += c;
        }
        SymMatrix(m)
    }

    /// `Wᵀ · self · W` for a rectangular `W`.
    pub fn congruence(&self, w: &DMatrix<f64>) -> SymMatrix {
        SymMatrix::symmetrized(w.transpose() * &self.0 * w)
    }

    pub fn direct_sum(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(block_diag(&self.0, &other.0))
    }

    /// True when `λ_min ≥ -tol · max(1, λ_max)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let eig = self.eig();
        eig.min() >= -tol * eig.max().max(1.0)
    }

    /// Errors with the offending eigenvalue unless the matrix is PSD within `tol`.
    pub fn check_psd(&self, tol: f64) -> Result<()> {
        let eig = self.eig();
        let bound = tol * eig.max().max(1.0);
        if eig.min() >= -bound {
            Ok(())
        } else {
            Err(Error::NotPsd { min_eigenvalue: eig.min(), bound })
        }
    }

    pub fn to_complex(&self) -> CMatrix {
        self.0.map(|x| Complex::new(x, 0.0))
    }
}

impl AsRef<DMatrix<f64>> for SymMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// A complex Hermitian matrix, hermitized at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix(CMatrix);

impl HermMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let h = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
        Ok(HermMatrix(h))
    }

    /// Hermitian part `(F + F*) / 2` of an arbitrary square matrix.
    pub fn real_part(f: &CMatrix) -> Result<Self> {
        Self::new(f.clone())
    }

    /// Imaginary part `(F - F*) / 2i` of an arbitrary square matrix.
    pub fn imag_part(f: &CMatrix) -> Result<Self> {
        let skew = (f - f.adjoint()) * Complex::new(0.0, -0.5);
        Self::new(skew)
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eigenvalues(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// `[[a, 0], [0, b]]`.
pub fn block_diag<T: nalgebra::Scalar + Zero>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::from_element(ra + rb, ca + cb, T::zero());
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Loewner order test `A ⪯ B`: `λ_min(B − A) ≥ −tol · max(1, ‖A‖, ‖B‖)`.
pub fn loewner_leq(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("{} vs {}", a.dim(), b.dim())));
    }
    let scale = 1f64.max(a.norm()).max(b.norm());
    Ok(b.sub(a).min_eigenvalue() >= -tol * scale)
}

/// A k-tuple of symmetric matrices of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    items: Vec<SymMatrix>,
    commuting: bool,
}

impl MatrixTuple {
    pub fn new(items: Vec<SymMatrix>) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::Dimension("a tuple needs at least one matrix".into()))?;
        let n = first.dim();
        if let Some(bad) = items.iter().find(|x| x.dim() != n) {
            return Err(Error::Dimension(format!("tuple items have dimensions {n} and {}", bad.dim())));
        }
        let commuting = items.len() == 1;
        Ok(MatrixTuple { items, commuting })
    }

    pub fn single(a: SymMatrix) -> Self {
        MatrixTuple { items: vec![a], commuting: true }
    }

    /// Checks pairwise commutators and sets the commuting flag on success.
    pub fn certify_commuting(mut self, tol: f64) -> Result<Self> {
        let residual = self.max_commutator();
        let scale = self.items.iter().map(|x| x.as_matrix().norm()).fold(0.0, f64::max);
        let bound = tol * scale * scale;
        if residual <= bound {
            self.commuting = true;
            Ok(self)
        } else {
            Err(Error::NotCommuting { residual, bound })
        }
    }

    /// Largest Frobenius norm of `X_i X_j − X_j X_i`.
    pub fn max_commutator(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.items.len() {
            for j in (i + 1)..self.items.len() {
                let a = self.items[i].as_matrix();
                let b = self.items[j].as_matrix();
                worst = worst.max((a * b - b * a).norm());
            }
        }
        worst
    }

    pub(crate) fn with_commuting_flag(mut self, flag: bool) -> Self {
        self.commuting = flag;
        self
    }

    pub fn is_commuting(&self) -> bool {
        self.commuting
    }

    pub fn arity(&self) -> usize {
        self.items.len()
    }

    pub fn dim(&self) -> usize {
        self.items[0].dim()
    }

    pub fn items(&self) -> &[SymMatrix] {
        &self.items
    }

    pub fn get(&self, i: usize) -> &SymMatrix {
        &self.items[i]
    }

    pub fn into_items(self) -> Vec<SymMatrix> {
        self.items
    }

    /// Coordinatewise `Wᵀ X_i W`. The result is not flagged as commuting.
    pub fn congruence(&self, w: &DMatrix<f64>) -> MatrixTuple {
        MatrixTuple {
            items: self.items.iter().map(|x| x.congruence(w)).collect(),
            commuting: self.items.len() == 1,
        }
    }

    pub fn direct_sum(&self, other: &MatrixTuple) -> Result<MatrixTuple> {
        if self.arity() != other.arity() {
            return Err(Error::Dimension(format!("arity {} vs {}", self.arity(), other.arity())));
        }
        let items = self.items.iter().zip(&other.items).map(|(a, b)| a.direct_sum(b)).collect();
        Ok(MatrixTuple { items, commuting: self.commuting && other.commuting })
    }

    /// Coordinatewise midpoint `(X + Y) / 2`.
    pub fn midpoint(&self, other: &MatrixTuple) -> Result<MatrixTuple> {
        if self.arity() != other.arity() || self.dim() != other.dim() {
            return Err(Error::Dimension("midpoint of tuples with different shapes".into()));
        }
        let items = self.items.iter().zip(&other.items).map(|(a, b)| a.add(b).scale(0.5)).collect();
        Ok(MatrixTuple { items, commuting: false }.with_commuting_flag(self.arity() == 1))
    }

    pub fn map<F: Fn(&SymMatrix) -> SymMatrix>(&self, f: F) -> MatrixTuple {
        MatrixTuple { items: self.items.iter().map(f).collect(), commuting: false }
            .with_commuting_flag(self.arity() == 1)
    }

    /// True when every coordinate is positive definite.
    pub fn is_pd(&self) -> bool {
        self.items.iter().all(|x| x.min_eigenvalue() > 0.0)
    }
}

/// A linear map `W: ℝⁿ → ℝᵐ` with `‖W‖ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    mat: DMatrix<f64>,
    isometry: bool,
}

const CONTRACTION_TOL: f64 = 1e-12;

impl Contraction {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let n = mat.ncols();
        let gram = SymMatrix::new(mat.transpose() * &mat)?;
        let eig = gram.eig();
        let norm = eig.max().max(0.0).sqrt();
        if norm > 1.0 + CONTRACTION_TOL {
            return Err(Error::NotContraction { norm });
        }
        let defect = gram.sub(&SymMatrix::identity(n)).eig().norm();
        Ok(Contraction { mat, isometry: defect <= CONTRACTION_TOL })
    }

    /// Embedding of ℝⁿ into ℝᵐ that sends basis vector `j` to basis vector `cols[j]`.
    pub fn coordinate_embedding(m: usize, cols: &[usize]) -> Result<Self> {
        let n = cols.len();
        let mut mat = DMatrix::zeros(m, n);
        for (j, &c) in cols.iter().enumerate() {
            if c >= m {
                return Err(Error::Dimension(format!("coordinate {c} out of range {m}")));
            }
            mat[(c, j)] = 1.0;
        }
        Self::new(mat)
    }

    pub fn source_dim(&self) -> usize {
        self.mat.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_isometry(&self) -> bool {
        self.isometry
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loewner_examples() {
        let i2 = SymMatrix::identity(2);
        assert!(loewner_leq(&i2, &i2.scale(2.0), 1e-10).unwrap());
        let a = SymMatrix::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        assert!(loewner_leq(&a, &a, 1e-12).unwrap());
        let p = SymMatrix::from_diagonal(&[2.0, 0.0]);
        let q = SymMatrix::from_diagonal(&[1.0, 1.0]);
        assert!(!loewner_leq(&p, &q, 1e-9).unwrap());
        assert!(!loewner_leq(&q, &p, 1e-9).unwrap());
    }

    #[test]
    fn loewner_rejects_mismatched_dims() {
        let err = loewner_leq(&SymMatrix::identity(2), &SymMatrix::identity(3), 1e-9);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn construction_symmetrizes() {
        let s = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).unwrap();
        assert_eq!(s.as_matrix()[(0, 1)], 1.0);
        assert_eq!(s.as_matrix()[(1, 0)], 1.0);
        assert!(SymMatrix::new(DMatrix::zeros(2, 3)).is_err());
        assert!(SymMatrix::new(DMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn tuple_rejects_mixed_dims() {
        let r = MatrixTuple::new(vec![SymMatrix::identity(2), SymMatrix::identity(3)]);
        assert!(r.is_err());
        assert!(MatrixTuple::new(vec![]).is_err());
    }

    #[test]
    fn non_commuting_pair_is_refused() {
        let a = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let b = SymMatrix::from_row_slice(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let t = MatrixTuple::new(vec![a, b]).unwrap();
        assert!(matches!(t.certify_commuting(1e-10), Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn contraction_flags() {
        let w = Contraction::new(DMatrix::from_row_slice(2, 1, &[0.6, 0.8])).unwrap();
        assert!(w.is_isometry());
        let c = Contraction::new(DMatrix::from_row_slice(1, 1, &[0.5])).unwrap();
        assert!(!c.is_isometry());
        assert!(Contraction::new(DMatrix::from_row_slice(1, 1, &[1.5])).is_err());
        let e = Contraction::coordinate_embedding(4, &[2, 0]).unwrap();
        assert!(e.is_isometry());
        assert_eq!(e.as_matrix()[(2, 0)], 1.0);
    }

    #[test]
    fn imag_part_of_complex_matrix() {
        let f = DMatrix::from_row_slice(1, 1, &[Complex::new(0.5, 0.25)]);
        let im = HermMatrix::imag_part(&f).unwrap();
        assert!((im.min_eigenvalue() - 0.25).abs() < 1e-15);
    }
}
