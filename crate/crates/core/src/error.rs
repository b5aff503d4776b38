use thiserror::Error;

/// Errors raised by models, oracles, samplers and training.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate at sigma zero")]
    DegenerateAtSigmaZero,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("noise level {sigma} outside oracle range [{min}, {max}]")]
    OutOfRange { sigma: f64, min: f64, max: f64 },

    #[error("score kind {kind} not supported by {model}")]
    Unsupported { kind: &'static str, model: &'static str },

    #[error("correction singular (gamma={gamma}, b={b}, t={t}{})", step_suffix(.step))]
    CorrectionSingular {
        gamma: f64,
        b: f64,
        t: f64,
        step: Option<usize>,
    },

    #[error("diverged at step {step}")]
    Diverged { step: usize },

    #[error("training diverged at iteration {iteration}")]
    TrainingDiverged { iteration: usize },

    #[error("cost cap exceeded: {0}")]
    CostCap(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn step_suffix(step: &Option<usize>) -> String {
    match step {
        Some(i) => format!(", step={i}"),
        None => String::new(),
    }
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::CorrectionSingular { .. }
                | Error::Diverged { .. }
                | Error::TrainingDiverged { .. }
                | Error::DegenerateAtSigmaZero
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn check_finite(x: &[f64], what: &'static str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
