//! Affine matrix pencils `L(X) = A0 ⊗ I + Σ A_i ⊗ X_i` and the evaluation of
//! `F(X)` as the compression to `e ⊗ ℝⁿ` of the short of `L(X)`.
//!
//! Kronecker layout: index `p·n + r` holds auxiliary coordinate `p` and matrix
//! coordinate `r`. A Householder reflection `Q` with `Q e = e₁` moves the
//! compression subspace onto the leading `n` coordinates.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numlin::{CMatrix, MatrixTuple, SymMatrix, DEFAULT_PSD_TOL};
use crate::shorted::{block_schur_general, shorted_operator, ShortOptions, DEFAULT_RANK_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct PencilRealization {
    e: DVector<f64>,
    a0: SymMatrix,
    a: Vec<SymMatrix>,
    // Q A Qᵀ for the offset and each coefficient.
    rot_a0: DMatrix<f64>,
    rot_a: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub tol: f64,
    pub rank_tol: f64,
    /// Check `L(X) ⪰ 0` before shorting.
    pub check_domain: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { tol: DEFAULT_PSD_TOL, rank_tol: DEFAULT_RANK_TOL, check_domain: true }
    }
}

impl PencilRealization {
    /// Validates `‖e‖ = 1` and `A0, A_i ⪰ 0` at the default tolerance.
    pub fn new(e: Vec<f64>, a0: SymMatrix, a: Vec<SymMatrix>) -> Result<Self> {
        Self::with_tol(e, a0, a, DEFAULT_PSD_TOL)
    }

    pub fn with_tol(e: Vec<f64>, a0: SymMatrix, a: Vec<SymMatrix>, tol: f64) -> Result<Self> {
        a0.check_psd(tol)?;
        Self::checked_coefficients(e, a0, a, tol)
    }

    /// Validates everything except the offset, which the caller has checked.
    fn checked_coefficients(e: Vec<f64>, a0: SymMatrix, a: Vec<SymMatrix>, tol: f64) -> Result<Self> {
        let m = e.len();
        if m == 0 {
            return Err(Error::Dimension("auxiliary dimension must be positive".into()));
        }
        if a.is_empty() {
            return Err(Error::Dimension("a realization needs at least one variable".into()));
        }
        if a0.dim() != m || a.iter().any(|ai| ai.dim() != m) {
            return Err(Error::Dimension(format!("coefficients must all be {m}x{m}")));
        }
        let e = DVector::from_vec(e);
        let norm = e.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("e must be a unit vector, has norm {norm}")));
        }
        for ai in &a {
            ai.check_psd(tol)?;
        }
        let q = householder_to_e1(&e);
        let rotate = |s: &SymMatrix| match &q {
            Some(q) => {
                let r = q * s.as_matrix() * q.transpose();
                (&r + r.transpose()) * 0.5
            }
            None => s.as_matrix().clone(),
        };
        let rot_a0 = rotate(&a0);
        let rot_a = a.iter().map(rotate).collect();
        Ok(PencilRealization { e, a0, a, rot_a0, rot_a })
    }

    /// Builds the affine form from `B0, B_i` with `A0 = B0 − Σ B_i`.
    ///
    /// `B0 ⪰ Σ B_i` is checked relative to `max(1, λ_max(B0))`. When the
    /// coefficients span many orders of magnitude the subtraction can leave
    /// `A0` with negative eigenvalues of order `ε‖B0‖`; those are accepted.
    pub fn from_b_form(e: Vec<f64>, b0: SymMatrix, b: Vec<SymMatrix>) -> Result<Self> {
        let tol = DEFAULT_PSD_TOL;
        let a0 = b.iter().fold(b0.clone(), |acc, bi| acc.sub(bi));
        let bound = tol * b0.eig().max().max(1.0);
        let lowest = a0.min_eigenvalue();
        if lowest < -bound {
            return Err(Error::NotPsd { min_eigenvalue: lowest, bound });
        }
        Self::checked_coefficients(e, a0, b, tol)
    }

    /// `(B0, B)` with `B_i = A_i`, `B0 = A0 + Σ A_i`.
    pub fn b_form(&self) -> (SymMatrix, Vec<SymMatrix>) {
        let b0 = self.a.iter().fold(self.a0.clone(), |acc, ai| acc.add(ai));
        (b0, self.a.clone())
    }

    pub fn arity(&self) -> usize {
        self.a.len()
    }

    pub fn aux_dim(&self) -> usize {
        self.e.len()
    }

    pub fn e(&self) -> &DVector<f64> {
        &self.e
    }

    pub fn offset(&self) -> &SymMatrix {
        &self.a0
    }

    pub fn coefficients(&self) -> &[SymMatrix] {
        &self.a
    }

    /// `(Q A0 Qᵀ, [Q A_i Qᵀ])` for the reflection `Q` with `Q e = e₁`.
    pub fn rotated(&self) -> (&DMatrix<f64>, &[DMatrix<f64>]) {
        (&self.rot_a0, &self.rot_a)
    }

    /// `A0 ⊗ I_n + Σ A_i ⊗ X_i` in the original auxiliary basis.
    pub fn assemble(&self, x: &MatrixTuple) -> Result<SymMatrix> {
        self.check_arity(x.arity())?;
        let mats: Vec<&DMatrix<f64>> = self.a.iter().map(|s| s.as_matrix()).collect();
        let items: Vec<&DMatrix<f64>> = x.items().iter().map(|s| s.as_matrix()).collect();
        Ok(SymMatrix::symmetrized(kron_sum(self.a0.as_matrix(), &mats, &items, x.dim())))
    }

    /// Evaluates `F(X)` at a real tuple.
    pub fn eval(&self, x: &MatrixTuple, opts: &EvalOptions) -> Result<SymMatrix> {
        self.check_arity(x.arity())?;
        let n = x.dim();
        let items: Vec<&DMatrix<f64>> = x.items().iter().map(|s| s.as_matrix()).collect();
        let rot: Vec<&DMatrix<f64>> = self.rot_a.iter().collect();
        let pencil = SymMatrix::symmetrized(kron_sum(&self.rot_a0, &rot, &items, n));
        let short_opts = ShortOptions { rank_tol: opts.rank_tol, psd_tol: opts.tol, verify: opts.check_domain };
        match shorted_operator(&pencil, n, &short_opts) {
            Ok(r) => Ok(r.short),
            Err(Error::NotPsd { min_eigenvalue, bound }) => Err(Error::OutsideDomain(format!(
                "pencil is not PSD at this point (eigenvalue {min_eigenvalue:e} below -{bound:e})"
            ))),
            Err(Error::RangeCondition { residual, bound }) => Err(Error::OutsideDomain(format!(
                "pencil is not PSD at this point (coupling {residual:e} into the kernel exceeds {bound:e})"
            ))),
            Err(other) => Err(other),
        }
    }

    /// Evaluates the analytic continuation at a complex tuple, normally with
    /// `Im X_i ≻ 0`.
    pub fn eval_complex(&self, x: &[CMatrix]) -> Result<CMatrix> {
        self.check_arity(x.len())?;
        let n = x[0].nrows();
        if x.iter().any(|xi| xi.nrows() != n || xi.ncols() != n) {
            return Err(Error::Dimension(format!("complex tuple items must all be {n}x{n}")));
        }
        let m = self.aux_dim();
        let mut z = CMatrix::zeros(m * n, m * n);
        for p in 0..m {
            for q in 0..m {
                let c0 = self.rot_a0[(p, q)];
                if c0 != 0.0 {
                    for r in 0..n {
                        z[(p * n + r, q * n + r)] += Complex::new(c0, 0.0);
                    }
                }
                for (ai, xi) in self.rot_a.iter().zip(x) {
                    let c = ai[(p, q)];
                    if c != 0.0 {
                        let mut block = z.view_mut((p * n, q * n), (n, n));
                        block += xi * Complex::new(c, 0.0);
                    }
                }
            }
        }
        block_schur_general(&z, n)
    }

    fn check_arity(&self, k: usize) -> Result<()> {
        if k != self.arity() {
            return Err(Error::Dimension(format!("realization takes {} variables, got {k}", self.arity())));
        }
        Ok(())
    }
}

/// `Q = I − 2vvᵀ/‖v‖²` with `v = e − e₁`, or `None` when `e = e₁` already.
fn householder_to_e1(e: &DVector<f64>) -> Option<DMatrix<f64>> {
    let mut v = e.clone();
    v[0] -= 1.0;
    let vv = v.norm_squared();
    if vv == 0.0 {
        return None;
    }
    let m = e.len();
    Some(DMatrix::identity(m, m) - (&v * v.transpose()) * (2.0 / vv))
}

fn kron_sum(a0: &DMatrix<f64>, a: &[&DMatrix<f64>], x: &[&DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let m = a0.nrows();
    let mut z = DMatrix::zeros(m * n, m * n);
    for p in 0..m {
        for q in 0..m {
            let c0 = a0[(p, q)];
            if c0 != 0.0 {
                for r in 0..n {
                    z[(p * n + r, q * n + r)] += c0;
                }
            }
            for (ai, xi) in a.iter().zip(x) {
                let c = ai[(p, q)];
                if c != 0.0 {
                    let mut block = z.view_mut((p * n, q * n), (n, n));
                    block += *xi * c;
                }
            }
        }
    }
    z
}
