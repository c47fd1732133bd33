use thiserror::Error;

/// Errors raised anywhere in the engine, the strategy evaluator or the front end.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unexpected end of input: {0}")]
    UnexpectedEof(String),
    #[error("empty input")]
    EmptyInput,
    #[error("sort error: {0}")]
    Sort(String),
    #[error("signature error: {0}")]
    Signature(String),
    #[error("unknown name: {0}")]
    Name(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("rule application error: {0}")]
    Application(String),
    #[error("arity error: {0}")]
    Arity(String),
    #[error("unification under AC symbol `{0}` is not supported")]
    UnsupportedAcUnification(String),
    #[error("path ordering over AC symbol `{0}` is not supported")]
    UnsupportedAcOrder(String),
    #[error("equational normalization exceeded {0} steps (equations may not terminate)")]
    NonTerminationSuspected(usize),
    #[error("strategy call depth exceeded {0}")]
    DepthExceeded(usize),
    #[error("fixpoint state budget of {0} exceeded")]
    StateBudgetExceeded(usize),
    #[error("inference budget of {0} rule applications exceeded")]
    InferenceBudgetExceeded(usize),
    #[error("{0}-completion failed")]
    CompletionFailed(String),
    #[error("session state error: {0}")]
    State(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by hitting a configured resource limit.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::NonTerminationSuspected(_)
                | Error::DepthExceeded(_)
                | Error::StateBudgetExceeded(_)
                | Error::InferenceBudgetExceeded(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
