use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("state has a negative eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("step normalization {0:.3e} is not positive and finite")]
    BadNormalization(f64),

    #[error("non-finite entries in the state")]
    NonFinite,

    #[error("integration failed at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Grid(String),

    #[error("snapshot series are misaligned: {0}")]
    Misaligned(String),

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("configuration error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            other => Error::AtStep {
                step,
                source: Box::new(other),
            },
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::AtStep { .. }
            | Error::BadNormalization(_)
            | Error::NonFinite
            | Error::NotPositive { .. }
            | Error::Eigen => true,
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
