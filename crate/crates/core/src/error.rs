use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game spec `{game}`: {reason}")]
    InvalidSpec { game: String, reason: String },

    #[error("template error in `{game}`: {reason}")]
    Template { game: String, reason: String },

    #[error("permutation index {index} out of range for {k} strategies (limit {limit})")]
    InvalidPermutation { index: usize, k: usize, limit: usize },

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("unknown game `{0}`")]
    UnknownGame(String),

    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),

    #[error("quote {quote} outside [{min}, {max}]")]
    QuoteOutOfRange { quote: i64, min: i64, max: i64 },

    #[error("transport failure talking to {endpoint}: {reason}")]
    Transport { endpoint: String, reason: String },

    #[error("backend does not know member {0}")]
    UnknownMember(u32),

    #[error("malformed backend response: {0}")]
    MalformedResponse(String),

    #[error("invalid backend descriptor: {0}")]
    InvalidBackend(String),

    #[error("sweep aborted: {missing} of {total} cells unscored after retries (first: {first})")]
    SweepIncomplete { missing: usize, total: usize, first: String },

    #[error("incomplete design: {0}")]
    IncompleteDesign(String),

    #[error("unpaired measurement lists: {left} vs {right}")]
    Unpaired { left: usize, right: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("experiment already completed at {0}; pass --overwrite to replace it")]
    AlreadyCompleted(PathBuf),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Transport failures are the only class the sweep retries.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Transport { .. })
    }

    /// Validation problems are caller errors; everything else is a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec { .. }
                | Error::Template { .. }
                | Error::InvalidPermutation { .. }
                | Error::UnknownStrategy(_)
                | Error::UnknownGame(_)
                | Error::QuoteOutOfRange { .. }
                | Error::InvalidBackend(_)
                | Error::Config(_)
                | Error::AlreadyCompleted(_)
                | Error::Unpaired { .. }
        )
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json { context: context.into(), source }
    }
}
