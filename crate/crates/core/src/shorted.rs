//! Shorted operators (generalized Schur complements) of PSD block matrices.
//!
//! For `Z = [[Z11, Z12], [Z21, Z22]]` with the pivot block `Z11` on the first
//! `s` coordinates, the short is `Z11 − Z12 Z22⁺ Z21`. It is the largest
//! symmetric `X` with `[[X, 0], [0, 0]] ⪯ Z`.
//!
//! `Z22` is split into the connected components of its sparsity pattern
//! before the pseudo-inverse is formed. Arrowhead pencils assembled by the
//! builders are block diagonal off the pivot, so each component is small.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numlin::{sym_eig, CMatrix, SymMatrix, DEFAULT_PSD_TOL};

/// Default relative eigenvalue cut for the pseudo-inverse of `Z22`.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Partition of `ℝᴺ` into the leading `pivot` coordinates and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPartition {
    total: usize,
    pivot: usize,
}

impl BlockPartition {
    pub fn new(total: usize, pivot: usize) -> Result<Self> {
        if pivot == 0 || pivot > total {
            return Err(Error::Dimension(format!("pivot dimension {pivot} must lie in 1..={total}")));
        }
        Ok(BlockPartition { total, pivot })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    pub fn complement(&self) -> usize {
        self.total - self.pivot
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortOptions {
    pub rank_tol: f64,
    pub psd_tol: f64,
    /// Check positivity of `Z` (via the Schur criterion) and the range condition.
    pub verify: bool,
}

impl Default for ShortOptions {
    fn default() -> Self {
        ShortOptions { rank_tol: DEFAULT_RANK_TOL, psd_tol: DEFAULT_PSD_TOL, verify: true }
    }
}

#[derive(Debug, Clone)]
pub struct ShortedResult {
    /// `Z11 − CᵀC`.
    pub short: SymMatrix,
    /// `C` with `Z21 = Z22^{1/2} C`, of shape `(N − s) × s`.
    pub c_factor: DMatrix<f64>,
    /// Retained rank of `Z22`.
    pub rank_used: usize,
}

/// Short of a PSD matrix onto its leading `pivot` coordinates.
pub fn shorted_operator(z: &SymMatrix, pivot: usize, opts: &ShortOptions) -> Result<ShortedResult> {
    let part = BlockPartition::new(z.dim(), pivot)?;
    let zm = z.as_matrix();
    let s = part.pivot();
    let r = part.complement();
    if r == 0 {
        if opts.verify {
            z.check_psd(opts.psd_tol)?;
        }
        return Ok(ShortedResult { short: z.clone(), c_factor: DMatrix::zeros(0, s), rank_used: 0 });
    }

    let z11 = SymMatrix::symmetrized(zm.view((0, 0), (s, s)).into_owned());
    let z21 = zm.view((s, 0), (r, s));
    let components = components(r, |i, j| zm[(s + i, s + j)] != 0.0);

    let blocks: Vec<_> = components
        .iter()
        .map(|idx| {
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| zm[(s + idx[a], s + idx[b])]);
            let eig = sym_eig(&SymMatrix::symmetrized(sub));
            (idx, eig)
        })
        .collect();

    let z11_max = z11.eig().max().max(0.0);
    let z22_max = blocks.iter().map(|(_, e)| e.max()).fold(0.0, f64::max);
    let scale = (z11_max + z22_max).max(1.0);
    let slack = opts.psd_tol * scale;

    let mut short = z11.as_matrix().clone();
    let mut c_factor = DMatrix::zeros(r, s);
    let mut rank_used = 0;

    for (idx, eig) in &blocks {
        if opts.verify && eig.min() < -slack {
            return Err(Error::NotPsd { min_eigenvalue: eig.min(), bound: slack });
        }
        let zc1 = DMatrix::from_fn(idx.len(), s, |a, b| z21[(idx[a], b)]);
        let projected = eig.basis.transpose() * &zc1;
        let cut = opts.rank_tol * eig.max().max(0.0);

        let mut half_inv = DMatrix::zeros(idx.len(), s);
        for (col, &lambda) in eig.values.iter().enumerate() {
            if lambda > cut && lambda > 0.0 {
                rank_used += 1;
                let row = projected.row(col) / lambda.sqrt();
                half_inv.row_mut(col).copy_from(&row);
            } else if opts.verify {
                // Compressing Z onto span{u, v} gives [[vᵀZ11v, uᵀZ21v], [., λ_u]],
                // which must stay PSD within the slack.
                let coupling = projected.row(col).norm();
                let bound = ((z11_max + slack) * (lambda.max(0.0) + slack)).sqrt() * (1.0 + 1e-8);
                if coupling > bound {
                    return Err(Error::RangeCondition { residual: coupling, bound });
                }
            }
        }
        // C_c = V diag(λ^{-1/2}) Vᵀ Z21c on the retained part; CᵀC = (VᵀZ21c)ᵀ diag(1/λ) (VᵀZ21c).
        let c_block = &eig.basis * &half_inv;
        short -= half_inv.transpose() * &half_inv;
        for (a, &row) in idx.iter().enumerate() {
            c_factor.row_mut(row).copy_from(&c_block.row(a));
        }
    }

    let short = SymMatrix::symmetrized(short);
    if opts.verify {
        let m = short.min_eigenvalue();
        if m < -slack {
            return Err(Error::NotPsd { min_eigenvalue: m, bound: slack });
        }
    }
    Ok(ShortedResult { short, c_factor, rank_used })
}

/// `inf_w [v; w]ᵀ Z [v; w]`, computed by solving the stationarity system
/// `Z22 w = −Z21 v` in the eigenbasis of `Z22` and evaluating the quadratic
/// form directly.
pub fn variational_infimum(z: &SymMatrix, v: &DVector<f64>, opts: &ShortOptions) -> Result<f64> {
    let n = z.dim();
    let s = v.len();
    BlockPartition::new(n, s)?;
    let zm = z.as_matrix();
    let full = zm.clone().symmetric_eigen();
    let lmax = full.eigenvalues.max();
    let lmin = full.eigenvalues.min();
    let bound = opts.psd_tol * lmax.max(1.0);
    if lmin < -bound {
        return Err(Error::NotPsd { min_eigenvalue: lmin, bound });
    }
    if s == n {
        return Ok((v.transpose() * zm * v)[(0, 0)]);
    }
    let r = n - s;
    let z22 = zm.view((s, s), (r, r)).into_owned();
    let rhs = zm.view((s, 0), (r, s)) * v;
    let eig = z22.symmetric_eigen();
    let cut = opts.rank_tol * eig.eigenvalues.max().max(0.0);
    let mut w = DVector::zeros(r);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cut && lambda > 0.0 {
            let u = eig.eigenvectors.column(i);
            w -= u * (u.dot(&rhs) / lambda);
        }
    }
    let mut x = DVector::zeros(n);
    x.rows_mut(0, s).copy_from(v);
    x.rows_mut(s, r).copy_from(&w);
    Ok((x.transpose() * zm * &x)[(0, 0)])
}

const SINGULAR_RTOL: f64 = 1e-12;

/// `Z11 − Z12 Z22⁻¹ Z21` for a general complex block matrix with invertible `Z22`.
///
/// `Z22` is split into connected components, each solved on its own; a
/// component is singular when `σ_min ≤ 1e-12 · ‖component‖_F`.
pub fn block_schur_general(z: &CMatrix, pivot: usize) -> Result<CMatrix> {
    if z.nrows() != z.ncols() {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", z.nrows(), z.ncols())));
    }
    let part = BlockPartition::new(z.nrows(), pivot)?;
    let s = part.pivot();
    let r = part.complement();
    let mut out = z.view((0, 0), (s, s)).into_owned();
    if r == 0 {
        return Ok(out);
    }
    let zero = Complex::new(0.0, 0.0);
    for idx in components(r, |i, j| z[(s + i, s + j)] != zero) {
        let sub = CMatrix::from_fn(idx.len(), idx.len(), |a, b| z[(s + idx[a], s + idx[b])]);
        let bound = SINGULAR_RTOL * sub.norm().max(f64::MIN_POSITIVE);
        let sigma_min = sub.clone().singular_values().min();
        if !(sigma_min > bound) {
            return Err(Error::SingularPivot { sigma_min, bound });
        }
        let zc1 = CMatrix::from_fn(idx.len(), s, |a, b| z[(s + idx[a], b)]);
        let z1c = CMatrix::from_fn(s, idx.len(), |a, b| z[(a, s + idx[b])]);
        let solved = sub
            .lu()
            .solve(&zc1)
            .ok_or(Error::SingularPivot { sigma_min, bound })?;
        out -= z1c * solved;
    }
    Ok(out)
}

/// Connected components of the graph on `0..n` with an edge wherever
/// `linked(i, j)` holds for `i < j`. Components are returned sorted.
fn components<F: Fn(usize, usize) -> bool>(n: usize, linked: F) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if linked(i, j) || linked(j, i) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// `[[S, 0], [0, 0]]` embedded in dimension `n`.
pub fn embed_short(short: &SymMatrix, n: usize) -> SymMatrix {
    let s = short.dim();
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (s, s)).copy_from(short.as_matrix());
    SymMatrix::symmetrized(m)
}
