use thiserror::Error;

/// Errors raised anywhere in the surrogate/sensitivity pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityDomain(f64),

    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),

    #[error("unsupported Sobol' dimension {requested} (table holds {available})")]
    UnsupportedDimension { requested: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate moments: {0}")]
    DegenerateMoments(String),

    #[error("Hankel matrix not positive definite (min eigenvalue {min_eigenvalue:e}, max {max_eigenvalue:e})")]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("basis construction failed in dimension {dim}, bin {bin}: {source}")]
    BinBasis {
        dim: usize,
        bin: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("decomposition failed in dimension {dim}: {reason}")]
    Decomposition { dim: usize, reason: String },

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("stochastic subdomain {0} received no training rows")]
    EmptySubdomain(usize),

    #[error("non-finite values in {what} at rows {rows:?}")]
    NonFinite { what: &'static str, rows: Vec<usize> },

    #[error("row count mismatch: design has {design} rows, outputs have {outputs}")]
    RowMismatch { design: usize, outputs: usize },

    #[error("method requires Nr = 0 (got Nr = {0}); use the multi-resolution indices")]
    WrongMethod(u32),

    #[error("invalid index subset: {0}")]
    InvalidSubset(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Coarse class of an error, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Invalid settings or arguments.
    Config,
    /// Unreadable, malformed or inconsistent input data.
    Data,
    /// A numerical procedure failed on otherwise valid input.
    Numerical,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InvalidDistribution(_) | InvalidSpace(_) | UnsupportedDimension { .. } | InvalidTruncation(_)
            | InvalidSubset(_) | WrongMethod(_) | Config(_) => ErrorCategory::Config,
            DimensionMismatch { .. } | EmptySubdomain(_) | NonFinite { .. } | RowMismatch { .. }
            | ShapeMismatch(_) | TooFewSamples { .. } | Parse(_) | Version { .. } | Io(_)
            | Decomposition { .. } => ErrorCategory::Data,
            ProbabilityDomain(_) | DegenerateMoments(_) | NotPositiveDefinite { .. } | Overflow(_) => {
                ErrorCategory::Numerical
            }
            BinBasis { source, .. } => match source.category() {
                ErrorCategory::Config => ErrorCategory::Config,
                _ => ErrorCategory::Numerical,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
