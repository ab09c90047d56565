use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("positivity violated: eigenvalue {eigenvalue:.6e} below tolerance")]
    PositivityViolation { eigenvalue: f64 },

    #[error("singular Sylvester pencil: eigenvalue sum {sum:.3e}")]
    SingularPencil { sum: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("metric is not invertible: {0}")]
    NonInvertibleMetric(String),

    #[error("calibration domain error: {0}")]
    Calibration(String),

    #[error("integration failure at t = {t}: non-finite generator or propagator")]
    IntegrationFailure { t: f64 },

    #[error("no convergence after {doublings} doublings (last delta {last_delta:.3e})")]
    ConvergenceFailure { doublings: usize, last_delta: f64 },

    #[error("dilation consistency error at t = {t}: Hermiticity residual {residual:.3e}")]
    DilationConsistency { t: f64, residual: f64 },

    #[error("synthesis failure: {0}")]
    Synthesis(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate normalization fit: all measured populations are zero")]
    DegenerateFit,

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
}

impl Error {
    /// Errors caused by numerical breakdown, as opposed to bad arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PositivityViolation { .. }
                | Error::SingularPencil { .. }
                | Error::IntegrationFailure { .. }
                | Error::ConvergenceFailure { .. }
                | Error::DilationConsistency { .. }
                | Error::NotUnitary { .. }
                | Error::Synthesis(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
