use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FraxionError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or contour scheme could not certify the requested tolerance.
    #[error("no convergence in {routine} at {at}: {detail}")]
    NonConvergence {
        routine: &'static str,
        at: f64,
        detail: String,
    },

    /// Adaptive quadrature finished with an error estimate above tolerance.
    #[error("quadrature failure: estimated error {abs_err:.3e} exceeds tolerance {tol:.3e}")]
    QuadratureFailure { abs_err: f64, tol: f64 },

    /// The time-stepping solver produced a non-finite or growing residual.
    #[error("solver divergence at step {step}: {detail}")]
    SolverDivergence { step: usize, detail: String },

    /// A tail model cannot bound the contribution beyond the grid.
    #[error("tail unbounded: {0}")]
    TailUnbounded(String),

    /// Two Laplace inversion methods disagree beyond their combined error.
    #[error("inversion unstable at t = {t}: gaver-stehfest {gaver:.6e}, talbot {talbot:.6e}")]
    InversionUnstable { t: f64, gaver: f64, talbot: f64 },
}

pub type Result<T> = std::result::Result<T, FraxionError>;

impl FraxionError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        FraxionError::Domain(msg.into())
    }

    /// True for the failures the CLI reports as numerical (exit code 3).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, FraxionError::Domain(_))
    }
}
