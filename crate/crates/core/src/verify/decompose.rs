//! Matrix convex combination certificates: a PD tuple `X` written as
//! `X_j = Vᵀ diag(p_j) V` with `V` an isometry and every row of the point
//! list `p` a strictly positive scalar tuple.
//!
//! For `k ≥ 2` the tuple is split as the average of `T_i = (zI, …, kX_i −
//! (k−1)zI, …, zI)`, each of which has a single non-scalar coordinate and
//! hence a spectral decomposition shared by all coordinates.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numlin::{MatrixTuple, SymMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct HullCertificate {
    /// `M × n` isometry.
    pub v: DMatrix<f64>,
    /// `M` scalar tuples of arity `k`.
    pub points: Vec<Vec<f64>>,
    /// Weight of the term each row belongs to (`1/k`), folded into `V`.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateCheck {
    /// `‖VᵀV − I‖_F`.
    pub orthogonality: f64,
    /// `max_j ‖Vᵀ diag(p_j) V − X_j‖_F / max(1, ‖X_j‖)`.
    pub reconstruction: f64,
    pub min_entry: f64,
}

impl CertificateCheck {
    pub fn passes(&self) -> bool {
        self.orthogonality <= 1e-12 && self.reconstruction <= 1e-10 && self.min_entry > 0.0
    }
}

impl HullCertificate {
    pub fn arity(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    /// `Vᵀ diag(p_j) V` for each coordinate `j`.
    pub fn reconstruct(&self) -> Result<Vec<SymMatrix>> {
        let k = self.arity();
        if self.points.len() != self.v.nrows() || self.points.iter().any(|p| p.len() != k) {
            return Err(Error::Dimension("certificate points do not match the rows of V".into()));
        }
        (0..k)
            .map(|j| {
                let mut scaled = self.v.clone();
                for (r, p) in self.points.iter().enumerate() {
                    scaled.row_mut(r).scale_mut(p[j]);
                }
                SymMatrix::new(self.v.transpose() * scaled)
            })
            .collect()
    }

    pub fn check(&self, x: &MatrixTuple) -> Result<CertificateCheck> {
        let n = self.v.ncols();
        if x.dim() != n || x.arity() != self.arity() {
            return Err(Error::Dimension("certificate does not match the tuple".into()));
        }
        let orthogonality = (self.v.transpose() * &self.v - DMatrix::identity(n, n)).norm();
        let rebuilt = self.reconstruct()?;
        let reconstruction = rebuilt
            .iter()
            .zip(x.items())
            .map(|(r, xj)| (r.as_matrix() - xj.as_matrix()).norm() / xj.norm().max(1.0))
            .fold(0.0, f64::max);
        let min_entry = self.points.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        Ok(CertificateCheck { orthogonality, reconstruction, min_entry })
    }
}

/// Certificate that a PD tuple lies in the matrix convex hull of strictly
/// positive scalar tuples.
pub fn comat_decompose(x: &MatrixTuple) -> Result<HullCertificate> {
    let k = x.arity();
    let n = x.dim();
    let eigs: Vec<_> = x.items().iter().map(|m| m.eig()).collect();
    let lowest = eigs.iter().map(|e| e.min()).fold(f64::INFINITY, f64::min);
    if !(lowest > 0.0) {
        return Err(Error::NotPd { min_eigenvalue: lowest });
    }
    if k == 1 {
        let e = &eigs[0];
        return Ok(HullCertificate {
            v: e.basis.transpose(),
            points: e.values.iter().map(|&v| vec![v]).collect(),
            weights: vec![1.0; n],
        });
    }
    let kf = k as f64;
    let z = 0.5 * lowest * kf / (kf - 1.0);
    let row_scale = 1.0 / kf.sqrt();
    let mut v = DMatrix::zeros(k * n, n);
    let mut points = Vec::with_capacity(k * n);
    for (i, xi) in x.items().iter().enumerate() {
        let e = xi.scale(kf).shift(-(kf - 1.0) * z).eig();
        for r in 0..n {
            let row = i * n + r;
            v.row_mut(row).copy_from(&(e.basis.column(r).transpose() * row_scale));
            let mut p = vec![z; k];
            p[i] = e.values[r];
            points.push(p);
        }
    }
    Ok(HullCertificate { v, points, weights: vec![1.0 / kf; k * n] })
}
