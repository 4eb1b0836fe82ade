use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse problem file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid problem: {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("gadget variables must be distinct (got {0:?})")]
    RepeatedVariable(Vec<usize>),

    #[error("bound must be non-negative, got {0}")]
    NegativeBound(i64),

    #[error("inequality is infeasible: slack bound {0} is negative")]
    InfeasibleInequality(i64),

    #[error("duplicate variable label `{0}`")]
    DuplicateLabel(String),

    #[error("qubos were built against different variable registries")]
    RegistryMismatch,

    #[error("assignment has {got} bits, qubo has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },

    #[error("qubo has {n} variables, exhaustive limit is {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed qubo export: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
