use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure in {routine}: {detail}")]
    Numerical { routine: &'static str, detail: String },

    /// A model or run configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// The caller asked for something the current state cannot do.
    #[error("logic error: {0}")]
    Logic(String),

    /// A gain model failed while filling the value table.
    #[error("value table cell (L={steps}, l={stops}): {source}")]
    Cell {
        steps: usize,
        stops: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
