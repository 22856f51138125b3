use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator is not Hermitian (defect {defect:.3e}, tolerance {tol:.0e})")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("non-Hermitian Hamiltonian sample at t = {t} (defect {defect:.3e})")]
    NonHermitianSample { t: f64, defect: f64 },

    #[error(
        "operator basis does not span the interaction operator at t = {t} \
         (projection residual {residual:.3e}); wrong error subspace?"
    )]
    BasisSpan { t: f64, residual: f64 },

    #[error("degenerate Frenet frame at t = {t} (Gram-Schmidt residual {residual:.3e})")]
    DegenerateFrame { t: f64, residual: f64 },

    #[error(
        "H0(t = {t}) does not anticommute with the noise direction (defect {defect:.3e}); \
         transform to a basis where {{H0, Q}} = 0 before using the recursion"
    )]
    AnticommutationViolated { t: f64, defect: f64 },

    #[error("pulse is not differentiable at t = {t} for derivative order {order}")]
    NonDifferentiable { t: f64, order: usize },

    #[error("degenerate scaling fit: {0}")]
    DegenerateFit(String),

    #[error("no optimization start converged (best residual {best:.3e} over {starts} starts)")]
    NoConvergence { best: f64, starts: usize },

    #[error("numerical degeneracy: {0}")]
    Degeneracy(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
