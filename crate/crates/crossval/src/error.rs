//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid generator, rule, or experiment specification.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument is outside its admissible range.
    #[error("bounds error: {0}")]
    Bounds(String),

    /// A split enumeration would exceed the combinatorial budget.
    #[error("budget error: enumeration needs {required} splits, budget is {limit}")]
    Budget { required: u64, limit: u64 },

    /// Malformed input file; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Mismatched sample sizes, dimensions, or task kinds.
    #[error("shape error: {0}")]
    Shape(String),

    /// A plan with the wrong scheme was passed to a scheme-specific criterion.
    #[error("scheme error: {0}")]
    Scheme(String),

    /// Rank-deficient or numerically singular linear system; never silently
    /// regularized.
    #[error("singularity error: {0}")]
    Singularity(String),

    /// A leverage of 1 makes the left-out point uninterpolable.
    #[error("degenerate leverage: H[{index},{index}] = {leverage} is at 1")]
    DegenerateLeverage { index: usize, leverage: f64 },

    /// trace(H) >= n leaves the GCV denominator non-positive.
    #[error("degenerate smoother: {0}")]
    DegenerateSmoother(String),

    /// Operation undefined for this task kind (e.g. aggregation on densities).
    #[error("unsupported task: {0}")]
    UnsupportedTask(String),

    /// A linear system is too ill-conditioned to solve reliably.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// A learning rule failed while evaluating a menu entry.
    #[error("rule '{id}' failed: {source}")]
    Rule {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn bounds(msg: impl Into<String>) -> Self {
        Error::Bounds(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn in_rule(self, id: &str) -> Self {
        Error::Rule {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
