use thiserror::Error;

/// Crate-wide error type. Variants map onto the harness exit codes: config
/// problems exit 1, data problems exit 2, numeric failures exit 3.
#[derive(Debug, Error)]
pub enum Error {
    /// An edge referenced a node id outside `0..n`.
    #[error("node id {id} out of range for a graph with {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    /// Two arrays that must agree in shape did not.
    #[error("{context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// A configuration field is outside its documented range.
    #[error("invalid `{field}`: {message}")]
    InvalidConfig { field: &'static str, message: String },

    /// A requested split cannot be drawn from the dataset.
    #[error("split infeasible: {0}")]
    SplitInfeasible(String),

    /// A dataset file failed to parse. Line numbers are 1-based.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// An underlying file read or write failed.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A dense routine was asked to handle a graph beyond its guard rail.
    #[error("{what} handles at most {limit} nodes, got {n}")]
    CapacityExceeded {
        what: &'static str,
        limit: usize,
        n: usize,
    },

    /// Eigendecomposition requires symmetric input.
    #[error("matrix not symmetric at ({i},{j}): |a_ij - a_ji| = {delta:e}")]
    NotSymmetric { i: usize, j: usize, delta: f64 },

    /// Dense linear solve hit a zero pivot.
    #[error("linear system singular at pivot column {column}")]
    Singular { column: usize },

    /// A NaN or infinity appeared where finite values are required.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// An iterative numeric routine exhausted its iteration budget.
    #[error("{context} did not converge")]
    NoConvergence { context: String },

    /// A formula was evaluated outside its mathematical domain.
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the harness maps this error onto.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. } | Error::Domain(_) => 1,
            Error::NodeOutOfRange { .. }
            | Error::ShapeMismatch { .. }
            | Error::SplitInfeasible(_)
            | Error::Parse { .. }
            | Error::Io { .. } => 2,
            Error::CapacityExceeded { .. }
            | Error::NotSymmetric { .. }
            | Error::Singular { .. }
            | Error::NonFinite { .. }
            | Error::NoConvergence { .. } => 3,
        }
    }
}
