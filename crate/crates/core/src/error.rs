use thiserror::Error;

/// Errors raised by the numerical kernels, builders and measure routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e} below -{bound:e}")]
    NotPsd { min_eigenvalue: f64, bound: f64 },

    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:e}")]
    NotPd { min_eigenvalue: f64 },

    #[error("tuple is not commuting: commutator norm {residual:e} exceeds {bound:e}")]
    NotCommuting { residual: f64, bound: f64 },

    #[error("joint diagonalization failed: off-diagonal residue {residue:e}")]
    JointDiagonalization { residue: f64 },

    #[error("function undefined at joint eigenvalue {point:?}")]
    FunctionUndefined { point: Vec<f64> },

    #[error("operator norm {norm} exceeds 1")]
    NotContraction { norm: f64 },

    #[error("range condition violated: residual {residual:e} exceeds {bound:e}")]
    RangeCondition { residual: f64, bound: f64 },

    #[error("pivot block is singular: smallest singular value {sigma_min:e} below {bound:e}")]
    SingularPivot { sigma_min: f64, bound: f64 },

    #[error("point lies outside the realized domain: {0}")]
    OutsideDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("support too large for exhaustive enumeration: {size} > {limit}")]
    SupportTooLarge { size: usize, limit: usize },

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
