//! Error type shared across the toolkit.

/// Library-wide error enum.
///
/// Variants are grouped by how the CLI maps them to exit codes:
/// parameter/precondition problems (exit 2), budget overruns (exit 3), and
/// internal consistency failures that indicate a bug (exit 4).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("operation requires a total (unmasked) function")]
    MaskedInput,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("grading mismatch: {0}")]
    GradingMismatch(String),
    #[error("coefficients not in normal form: {0}")]
    NotNormalForm(String),
    #[error("undefined entry: {0}")]
    UndefinedEntry(String),
    #[error("unknown kind: {0}")]
    UnknownKind(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain extension covered {coverage:.4} of the group, below target {target:.4}; retry with a larger shift set")]
    RetryWithLargerA { coverage: f64, target: f64 },

    #[error("cost {attempted} exceeds budget {budget} for {what}")]
    BudgetExceeded {
        attempted: u128,
        budget: u64,
        what: String,
    },

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
    #[error("structural error: {0}")]
    Structural(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for this error class (0 is success, reserved).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            Error::InternalConsistency(_) | Error::Structural(_) => 4,
            _ => 2,
        }
    }
}
