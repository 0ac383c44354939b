use thiserror::Error;

use crate::langevin::MeanFieldState;
use crate::model::Diagnostic;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter set failed validation; carries every violated invariant.
    #[error("invalid parameters: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation requires a parameter regime the input does not satisfy.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("resonant singular parameters: determinant {det:.3e}, condition number {cond:.3e}")]
    Singular { det: f64, cond: f64 },

    #[error("undefined normalization: both input amplitudes are zero")]
    UndefinedNormalization,

    #[error("degenerate mixing angle: coupling and effective detuning both vanish")]
    DegenerateAngle,

    #[error("integration failed at t = {t}: {reason}")]
    Integration {
        t: f64,
        reason: String,
        last: Box<MeanFieldState>,
    },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::Integration { .. } | Error::Internal(_)
        )
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
