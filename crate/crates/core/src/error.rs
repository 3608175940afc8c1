use thiserror::Error;

/// Errors raised across the crate.
///
/// Each variant maps onto one of the stable CLI exit statuses through
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown generator {0}")]
    UnknownGenerator(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("base representation mismatch: {0}")]
    BaseMismatch(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("numerical conditioning: {0}")]
    Conditioning(String),

    #[error("newton projection did not converge after {iterations} iterations (defect {defect:.3e})")]
    Convergence { iterations: usize, defect: f64 },

    #[error("degenerate skew form: vector {index} pairs to zero with the remaining space ({vector})")]
    Degenerate { index: usize, vector: String },

    #[error("step {step:e} outside the admissible range [{min:e}, {max:e}]")]
    Step { step: f64, min: f64, max: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit status used by the command-line front end.
    ///
    /// 2 covers input and schema problems, 3 numerical trouble. Status 1 is
    /// reserved for property failures reported by `verify`.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownGenerator(_)
            | Error::InvalidInput(_)
            | Error::Precondition(_)
            | Error::BaseMismatch(_)
            | Error::Schema(_)
            | Error::Step { .. }
            | Error::Io(_) => 2,
            Error::Conditioning(_) | Error::Convergence { .. } | Error::Degenerate { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
