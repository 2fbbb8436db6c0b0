use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("generator count {0} not supported (1..=5)")]
    UnsupportedGenerators(usize),

    #[error("singular operator (smallest singular value {smallest:e}, largest {largest:e})")]
    SingularOperator { smallest: f64, largest: f64 },

    #[error("singular Cauchy kernel: s lies on the sphere of p")]
    SingularKernel,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("function is not in the bounded class: {0}")]
    NotBnd(String),

    #[error("quadrature did not converge (last delta {delta:e})")]
    QuadratureDiverged { delta: f64 },

    #[error("function class violation: {0}")]
    CalcClass(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("operator is not bisectorial: {0}")]
    NotBisectorial(String),

    #[error("no regularizer found: {0}")]
    NotRegularizable(String),

    #[error("regularizer operator is not injective (margin {margin:e})")]
    InjectivityFailure { margin: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
