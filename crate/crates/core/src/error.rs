use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),

    #[error("impossible observation under current belief")]
    ImpossibleObservation,

    #[error("impossible observation/message pair")]
    ImpossiblePair,

    #[error("regions do not partition [0,1]: {0}")]
    NotPartition(String),

    #[error("unreachable message")]
    UnreachableMessage,

    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("inconsistent message history: {0}")]
    InconsistentHistory(String),

    #[error("non-stationary input: {0}")]
    NonStationary(String),

    #[error("O2 policy has no finite stopping horizon")]
    UnboundedPolicy,

    #[error("variant mismatch: {0}")]
    Variant(String),

    #[error("oracle cap exceeded: about {estimate:.3e} evaluations, cap {cap:.3e}")]
    CapExceeded { estimate: f64, cap: f64 },

    #[error("epsilon {requested} not certified up to horizon {max_horizon}; best bound {best}")]
    EpsilonUnattainable {
        requested: f64,
        max_horizon: usize,
        best: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
