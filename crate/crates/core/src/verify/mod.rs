//! Randomized property suites over free maps: pencil realizations, scalar
//! functions applied through the joint functional calculus, and arbitrary
//! closures (for negative controls).
//!
//! Trial `j` of a suite draws all of its randomness from `seed + j`, so a
//! report depends only on the configuration, never on scheduling.

mod decompose;
mod suites;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numlin::{apply_scalar_function, CMatrix, MatrixTuple, SymMatrix};
use crate::pencil::{EvalOptions, PencilRealization};

pub use decompose::{comat_decompose, CertificateCheck, HullCertificate};
pub use suites::{
    check_concave, check_free_axioms, check_herglotz, check_hypograph_saturation, check_jensen_isometry,
    check_monotone,
};

/// Default spectrum for sampled positive matrices.
pub const DEFAULT_SAMPLE_INTERVAL: (f64, f64) = (0.1, 10.0);

/// A dimension-indexed family of maps on tuples of symmetric matrices.
pub trait FreeMap: Sync {
    fn arity(&self) -> usize;

    fn eval(&self, x: &MatrixTuple) -> Result<SymMatrix>;

    /// Whether `eval` needs commuting tuples.
    fn requires_commuting(&self) -> bool {
        false
    }

    fn eval_complex(&self, _x: &[CMatrix]) -> Result<CMatrix> {
        Err(Error::InvalidParameter("no analytic continuation available".into()))
    }
}

impl FreeMap for PencilRealization {
    fn arity(&self) -> usize {
        PencilRealization::arity(self)
    }

    fn eval(&self, x: &MatrixTuple) -> Result<SymMatrix> {
        PencilRealization::eval(self, x, &EvalOptions::default())
    }

    fn eval_complex(&self, x: &[CMatrix]) -> Result<CMatrix> {
        PencilRealization::eval_complex(self, x)
    }
}

/// `f` applied to commuting tuples through the joint spectral decomposition.
pub struct ScalarMap<F> {
    arity: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScalarMap<F> {
    pub fn new(arity: usize, f: F) -> Self {
        ScalarMap { arity, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> FreeMap for ScalarMap<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &MatrixTuple) -> Result<SymMatrix> {
        apply_scalar_function(&self.f, x)
    }

    fn requires_commuting(&self) -> bool {
        true
    }
}

/// Any closure on tuples.
pub struct FnMap<F> {
    arity: usize,
    f: F,
}

impl<F: Fn(&MatrixTuple) -> Result<SymMatrix> + Sync> FnMap<F> {
    pub fn new(arity: usize, f: F) -> Self {
        FnMap { arity, f }
    }
}

impl<F: Fn(&MatrixTuple) -> Result<SymMatrix> + Sync> FreeMap for FnMap<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &MatrixTuple) -> Result<SymMatrix> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    /// Trials per dimension.
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Spectrum of sampled positive matrices.
    pub interval: Option<(f64, f64)>,
    pub execution: Execution,
}

impl SuiteConfig {
    pub fn new(dims: Vec<usize>, trials: usize, seed: u64, tol: f64) -> Self {
        SuiteConfig { dims, trials, seed, tol, interval: None, execution: Execution::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be positive", self.tol)));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidParameter("dimensions must be a nonempty list of positive integers".into()));
        }
        if let Some((a, b)) = self.interval {
            if !(a > 0.0 && b >= a && b.is_finite()) {
                return Err(Error::InvalidParameter(format!("sample interval ({a}, {b}) must lie in (0, ∞)")));
            }
        }
        Ok(())
    }

    pub fn sample_interval(&self) -> (f64, f64) {
        self.interval.unwrap_or(DEFAULT_SAMPLE_INTERVAL)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub dims: Vec<usize>,
    /// Trials run per dimension, skipped ones included.
    pub trials: Vec<usize>,
    pub failures: usize,
    pub skipped: usize,
    /// Smallest normalized margin seen; negative values are violations.
    pub worst_violation: f64,
    pub first_failing_seed: Option<u64>,
    pub seed: u64,
    pub tol: f64,
    pub pass: bool,
}

/// Result of one trial: a normalized margin (negative = violation), or a skip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Trial {
    Margin(f64),
    Skipped,
}

/// Errors that mean "this sample left the domain" rather than "the suite is
/// misconfigured".
pub(crate) fn is_domain_error(e: &Error) -> bool {
    matches!(
        e,
        Error::OutsideDomain(_)
            | Error::NotPsd { .. }
            | Error::NotPd { .. }
            | Error::RangeCondition { .. }
            | Error::NotCommuting { .. }
            | Error::JointDiagonalization { .. }
            | Error::FunctionUndefined { .. }
    )
}

/// Runs `trial(dim, seed, index_within_dim)` for every trial and aggregates
/// with order-independent reductions.
pub(crate) fn run_suite<F>(name: &str, cfg: &SuiteConfig, trial: F) -> Result<VerificationReport>
where
    F: Fn(usize, u64, usize) -> Result<Trial> + Sync + Send,
{
    cfg.validate()?;
    let total = cfg.dims.len() * cfg.trials;
    let outcomes = cfg.execution.map(total, |j| {
        let dim = cfg.dims[j / cfg.trials];
        let seed = cfg.seed.wrapping_add(j as u64);
        match trial(dim, seed, j % cfg.trials) {
            Ok(t) => Ok((seed, t)),
            Err(e) if is_domain_error(&e) => Ok((seed, Trial::Skipped)),
            Err(e) => Err(e),
        }
    });
    let mut failures = 0;
    let mut skipped = 0;
    let mut worst: Option<f64> = None;
    let mut first_failing_seed: Option<u64> = None;
    for o in outcomes {
        let (seed, t) = o?;
        match t {
            Trial::Skipped => skipped += 1,
            Trial::Margin(v) => {
                worst = Some(match worst {
                    Some(w) => w.min(v),
                    None => v,
                });
                if !(v >= -cfg.tol) {
                    failures += 1;
                    first_failing_seed = Some(first_failing_seed.map_or(seed, |s| s.min(seed)));
                }
            }
        }
    }
    Ok(VerificationReport {
        suite: name.to_string(),
        dims: cfg.dims.clone(),
        trials: vec![cfg.trials; cfg.dims.len()],
        failures,
        skipped,
        worst_violation: worst.unwrap_or(0.0),
        first_failing_seed,
        seed: cfg.seed,
        tol: cfg.tol,
        pass: failures == 0,
    })
}

/// Hermitian part `(F − F*)/2i`, the imaginary part of a complex matrix.
pub(crate) fn imaginary_part(f: &CMatrix) -> CMatrix {
    (f - f.adjoint()) * Complex::new(0.0, -0.5)
}
