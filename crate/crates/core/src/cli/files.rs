//! JSON file formats. Every float is stored as a hex-float string; fields
//! ending in `_decimal` are human-readable mirrors and are ignored on load.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::hexfloat::{hex_vec, unhex, Hex};
use crate::measures::{Coupling, DiscreteMeasure, UpperSetCertificate};
use crate::numlin::{CMatrix, MatrixTuple, SymMatrix};
use crate::pencil::PencilRealization;
use crate::verify::{HullCertificate, VerificationReport};

/// Relative asymmetry accepted when loading a symmetric matrix.
const SYMMETRY_RTOL: f64 = 1e-12;

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn hex_rows(rows: &[Vec<f64>]) -> Vec<Vec<Hex>> {
    rows.iter().map(|r| hex_vec(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<Hex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<Hex>>>,
    #[serde(default, skip_deserializing)]
    re_decimal: Vec<Vec<f64>>,
    #[serde(default, skip_deserializing, skip_serializing_if = "Option::is_none")]
    im_decimal: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn from_real(m: &DMatrix<f64>) -> Self {
        let re = rows_of(m);
        MatrixFile { rows: m.nrows(), cols: m.ncols(), re: hex_rows(&re), im: None, re_decimal: re, im_decimal: None }
    }

    pub fn from_complex(m: &CMatrix) -> Self {
        let re = rows_of(&m.map(|z| z.re));
        let im = rows_of(&m.map(|z| z.im));
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            re: hex_rows(&re),
            im: Some(hex_rows(&im)),
            re_decimal: re,
            im_decimal: Some(im),
        }
    }

    fn grid(&self, data: &[Vec<Hex>], part: &str) -> Result<DMatrix<f64>, String> {
        if data.len() != self.rows || data.iter().any(|r| r.len() != self.cols) {
            return Err(format!("'{part}' is not a {}x{} array", self.rows, self.cols));
        }
        Ok(DMatrix::from_fn(self.rows, self.cols, |i, j| data[i][j].0))
    }

    pub fn is_complex(&self) -> bool {
        self.im.is_some()
    }

    pub fn to_real(&self) -> Result<DMatrix<f64>, String> {
        if let Some(im) = &self.im {
            if self.grid(im, "im")?.iter().any(|&v| v != 0.0) {
                return Err("expected real data, found a nonzero imaginary part".into());
            }
        }
        self.grid(&self.re, "re")
    }

    pub fn to_complex(&self) -> Result<CMatrix, String> {
        let re = self.grid(&self.re, "re")?;
        let im = match &self.im {
            Some(im) => self.grid(im, "im")?,
            None => DMatrix::zeros(self.rows, self.cols),
        };
        Ok(re.zip_map(&im, Complex::new))
    }

    /// Real symmetric data; asymmetry beyond roundoff is an error.
    pub fn to_sym(&self) -> Result<SymMatrix, String> {
        let m = self.to_real()?;
        if m.nrows() != m.ncols() {
            return Err(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols()));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if !(asym <= SYMMETRY_RTOL * scale) {
            return Err(format!("matrix is not symmetric (asymmetry {asym:e})"));
        }
        SymMatrix::new(m).map_err(|e| e.to_string())
    }
}

/// A single matrix or a tuple of matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointFile {
    Tuple { items: Vec<MatrixFile> },
    Single(MatrixFile),
}

impl PointFile {
    pub fn from_tuple(x: &MatrixTuple) -> Self {
        PointFile::Tuple { items: x.items().iter().map(|m| MatrixFile::from_real(m.as_matrix())).collect() }
    }

    pub fn items(&self) -> &[MatrixFile] {
        match self {
            PointFile::Tuple { items } => items,
            PointFile::Single(m) => std::slice::from_ref(m),
        }
    }

    pub fn is_complex(&self) -> bool {
        self.items().iter().any(MatrixFile::is_complex)
    }

    pub fn to_tuple(&self) -> Result<MatrixTuple, String> {
        let items = self.items().iter().map(MatrixFile::to_sym).collect::<Result<Vec<_>, _>>()?;
        MatrixTuple::new(items).map_err(|e| e.to_string())
    }

    pub fn to_complex(&self) -> Result<Vec<CMatrix>, String> {
        self.items().iter().map(MatrixFile::to_complex).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationFile {
    pub k: usize,
    pub m: usize,
    pub e: Vec<Hex>,
    #[serde(rename = "A0")]
    pub a0: MatrixFile,
    #[serde(rename = "A")]
    pub a: Vec<MatrixFile>,
    /// Builder grammar string, when the file came from `realize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(default, skip_deserializing)]
    e_decimal: Vec<f64>,
}

impl RealizationFile {
    pub fn new(r: &PencilRealization, function: Option<String>) -> Self {
        let e: Vec<f64> = r.e().iter().copied().collect();
        RealizationFile {
            k: r.arity(),
            m: r.aux_dim(),
            e: hex_vec(&e),
            a0: MatrixFile::from_real(r.offset().as_matrix()),
            a: r.coefficients().iter().map(|m| MatrixFile::from_real(m.as_matrix())).collect(),
            function,
            e_decimal: e,
        }
    }

    pub fn to_realization(&self) -> Result<PencilRealization, String> {
        if self.a.len() != self.k {
            return Err(format!("k = {} but {} coefficient matrices", self.k, self.a.len()));
        }
        if self.e.len() != self.m {
            return Err(format!("m = {} but e has {} entries", self.m, self.e.len()));
        }
        let a = self.a.iter().map(MatrixFile::to_sym).collect::<Result<Vec<_>, _>>()?;
        PencilRealization::new(unhex(&self.e), self.a0.to_sym()?, a).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub n: usize,
    pub atoms: Vec<MatrixFile>,
    pub weights: Vec<Hex>,
    #[serde(default, skip_deserializing)]
    weights_decimal: Vec<f64>,
}

impl MeasureFile {
    pub fn new(mu: &DiscreteMeasure) -> Self {
        MeasureFile {
            n: mu.dim(),
            atoms: mu.atoms().iter().map(|a| MatrixFile::from_real(a.as_matrix())).collect(),
            weights: hex_vec(mu.weights()),
            weights_decimal: mu.weights().to_vec(),
        }
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure, String> {
        let atoms = self.atoms.iter().map(MatrixFile::to_sym).collect::<Result<Vec<_>, _>>()?;
        if atoms.iter().any(|a| a.dim() != self.n) {
            return Err(format!("atoms must all be {0}x{0}", self.n));
        }
        DiscreteMeasure::new(atoms, unhex(&self.weights)).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub suite: String,
    pub dims: Vec<usize>,
    /// Trials per dimension.
    pub trials: usize,
    pub failures: usize,
    pub worst_violation: Hex,
    pub seed: u64,
    pub tol: Hex,
    pub pass: bool,
    pub skipped: usize,
    pub first_failing_seed: Option<u64>,
    pub version: String,
    #[serde(default, skip_deserializing)]
    worst_violation_decimal: f64,
    #[serde(default, skip_deserializing)]
    tol_decimal: f64,
}

impl ReportFile {
    pub fn new(r: &VerificationReport) -> Self {
        ReportFile {
            suite: r.suite.clone(),
            dims: r.dims.clone(),
            trials: r.trials.first().copied().unwrap_or(0),
            failures: r.failures,
            worst_violation: Hex(r.worst_violation),
            seed: r.seed,
            tol: Hex(r.tol),
            pass: r.pass,
            skipped: r.skipped,
            first_failing_seed: r.first_failing_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            worst_violation_decimal: r.worst_violation,
            tol_decimal: r.tol,
        }
    }

    pub fn to_report(&self) -> Result<VerificationReport, String> {
        if self.pass != (self.failures == 0) {
            return Err(format!("pass = {} contradicts {} failures", self.pass, self.failures));
        }
        Ok(VerificationReport {
            suite: self.suite.clone(),
            dims: self.dims.clone(),
            trials: vec![self.trials; self.dims.len()],
            failures: self.failures,
            skipped: self.skipped,
            worst_violation: self.worst_violation.0,
            first_failing_seed: self.first_failing_seed,
            seed: self.seed,
            tol: self.tol.0,
            pass: self.pass,
        })
    }
}

/// Outcome of an order query: a coupling, or a violated upper set given by
/// atom indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OrderCertificateFile {
    Leq {
        coupling: MatrixFile,
    },
    NotLeq {
        #[serde(rename = "U")]
        mu_in_u: Vec<usize>,
        #[serde(rename = "nu_in_U")]
        nu_in_u: Vec<usize>,
        mu_mass: Hex,
        nu_mass: Hex,
    },
}

impl OrderCertificateFile {
    pub fn coupling(c: &Coupling) -> Self {
        OrderCertificateFile::Leq { coupling: MatrixFile::from_real(c.gamma()) }
    }

    pub fn upper_set(c: &UpperSetCertificate) -> Self {
        OrderCertificateFile::NotLeq {
            mu_in_u: c.mu_in_u.clone(),
            nu_in_u: c.nu_in_u.clone(),
            mu_mass: Hex(c.mu_mass),
            nu_mass: Hex(c.nu_mass),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullCertificateFile {
    pub k: usize,
    pub n: usize,
    #[serde(rename = "V")]
    pub v: MatrixFile,
    pub points: Vec<Vec<Hex>>,
    pub weights: Vec<Hex>,
}

impl HullCertificateFile {
    pub fn new(c: &HullCertificate) -> Self {
        HullCertificateFile {
            k: c.arity(),
            n: c.v.ncols(),
            v: MatrixFile::from_real(&c.v),
            points: c.points.iter().map(|p| hex_vec(p)).collect(),
            weights: hex_vec(&c.weights),
        }
    }

    pub fn to_certificate(&self) -> Result<HullCertificate, String> {
        let v = self.v.to_real()?;
        if v.ncols() != self.n || self.points.len() != v.nrows() || self.weights.len() != v.nrows() {
            return Err("certificate shapes disagree".into());
        }
        if self.points.iter().any(|p| p.len() != self.k) {
            return Err(format!("every point must have {} coordinates", self.k));
        }
        Ok(HullCertificate {
            v,
            points: self.points.iter().map(|p| unhex(p)).collect(),
            weights: unhex(&self.weights),
        })
    }
}
