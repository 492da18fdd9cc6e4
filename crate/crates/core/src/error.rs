use thiserror::Error;

/// Errors produced by the solvers, the estimator and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("nonlinear solver failed on slab {slab}: residual {residual:e} after {iterations} iterations")]
    SolverFailure {
        slab: usize,
        residual: f64,
        iterations: usize,
    },

    #[error("event not found: requested occurrence {requested}, found {found}")]
    EventNotFound { requested: usize, found: usize },

    #[error("degenerate denominator {denominator:e} (direct part {direct:e}); crossing is not transversal")]
    DegenerateDenominator { denominator: f64, direct: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
