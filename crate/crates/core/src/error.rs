use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field value count {got} does not match grid size {expected}")]
    FieldLength { expected: usize, got: usize },

    #[error("singular operator at wavenumber {mode:?} (symbol {symbol:e})")]
    SingularOperator { mode: Vec<i64>, symbol: f64 },

    #[error("inverse transform left an imaginary residue of {residue:e}")]
    NonRealResult { residue: f64 },

    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("SAV argument is not positive: integral of F + C0 = {0:e}")]
    SavPositivity(f64),

    #[error("multiplier solve failed for {multiplier}: {reason} (reduce the time step)")]
    MultiplierFailure {
        multiplier: String,
        reason: String,
        trace: Vec<f64>,
    },

    #[error("degenerate {0}")]
    Degenerate(String),

    #[error("invalid scheme state: {0}")]
    InvalidState(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn multiplier(name: &str, reason: impl Into<String>, trace: Vec<f64>) -> Self {
        Error::MultiplierFailure {
            multiplier: name.to_string(),
            reason: reason.into(),
            trace,
        }
    }

    /// Attach the multiplier name to a solver failure.
    pub(crate) fn for_multiplier(self, name: &str) -> Self {
        match self {
            Error::MultiplierFailure { reason, trace, .. } => {
                Error::multiplier(name, reason, trace)
            }
            other => other,
        }
    }

    /// True for failures of the nonlinear multiplier solves or non-finite fields,
    /// i.e. everything a smaller time step could cure.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::MultiplierFailure { .. }
                | Error::Degenerate(_)
                | Error::NonFinite(_)
                | Error::SavPositivity(_)
                | Error::SingularOperator { .. }
        )
    }
}
