use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("{what} out of domain: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("non-finite {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    /// A fringe measurement could not be made on the given trace.
    #[error("analysis failed: {0}")]
    Analysis(String),

    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),

    #[error("no chain named `{0}`")]
    UnknownChain(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}
