use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps [`Error::Config`] and [`Error::Precondition`] to exit code 1
/// and the numerical variants to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical degeneracy in block d={block}: condition estimate {condition:e}")]
    Degenerate { block: i64, condition: f64 },

    #[error("numerical degeneracy: {0}")]
    Numerical(String),

    #[error("sampler stalled: {0}")]
    Sampler(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure is a numerical problem rather than a bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate { .. } | Error::Numerical(_) | Error::Sampler(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
