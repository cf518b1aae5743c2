use thiserror::Error;

/// Failures raised by the library. Every variant carries enough context to be
/// printed verbatim by a front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(
        "precondition failed: sequence is not almost decreasing on the window \
         (pair p = {p}, q = {q} needs log H = {log_h:.4})"
    )]
    NotAlmostDecreasing { p: usize, q: usize, log_h: f64 },

    #[error("not well-defined: {0}")]
    WellDefinedness(String),

    #[error(
        "capacity exhausted: no breakpoint for family member k = {k} within P_max = {p_max}; \
         retry with a larger P_max"
    )]
    Capacity { k: usize, p_max: usize },

    #[error("domain exhausted: {0}")]
    DomainExhausted(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by unmet mathematical hypotheses rather than bad input.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_)
                | Error::NotAlmostDecreasing { .. }
                | Error::WellDefinedness(_)
                | Error::Capacity { .. }
                | Error::DomainExhausted(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
