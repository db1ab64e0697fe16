use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("fock truncation insufficient: {0}")]
    Truncation(String),

    #[error("perturbative initial state breaks down: {0}")]
    NonPerturbative(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("trace drift {drift:.3e} at t = {time:.6}; reduce dt (currently {dt})")]
    TraceDrift { drift: f64, time: f64, dt: f64 },

    #[error("kernel cache needs {required_bytes} bytes (limit {limit_bytes}); increase dt or reduce t_max/N")]
    MemoryBound {
        required_bytes: usize,
        limit_bytes: usize,
    },

    #[error("time {time} outside cached range [0, {max}]")]
    OutOfRange { time: f64, max: f64 },

    #[error("undefined matrix element ({row}, {col}): vanishing denominator")]
    UndefinedElement { row: usize, col: usize },

    #[error("{0}")]
    Config(String),

    #[error("scenario '{scenario}': {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used by the CLI error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::DimensionMismatch { .. } => "dimension",
            Error::NotHermitian { .. } => "not-hermitian",
            Error::NotUnitary { .. } => "not-unitary",
            Error::Truncation(_) => "truncation",
            Error::NonPerturbative(_) => "non-perturbative",
            Error::Quadrature(_) => "quadrature",
            Error::TraceDrift { .. } => "trace-drift",
            Error::MemoryBound { .. } => "memory",
            Error::OutOfRange { .. } => "out-of-range",
            Error::UndefinedElement { .. } => "undefined-element",
            Error::Config(_) => "config",
            Error::Scenario { source, .. } => source.kind(),
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
