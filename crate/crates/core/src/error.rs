use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// The quantity is defined but this implementation does not evaluate it
    /// for the given parameters.
    #[error("unsupported parameters for {what}: {detail}")]
    Unsupported { what: &'static str, detail: String },

    /// An iterative or adaptive routine did not reach its accuracy target.
    #[error("numerical failure in {what}: {detail}")]
    Numerical {
        what: &'static str,
        detail: String,
        /// Best available estimate at the point of failure, if any.
        partial: Option<f64>,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { what, detail: detail.into() }
    }

    pub(crate) fn unsupported(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Unsupported { what, detail: detail.into() }
    }

    pub(crate) fn numerical(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical { what, detail: detail.into(), partial: None }
    }

    pub(crate) fn with_partial(mut self, value: f64) -> Self {
        if let Error::Numerical { partial, .. } = &mut self {
            *partial = Some(value);
        }
        self
    }

    /// True for errors caused by invalid or unsupported input rather than
    /// by a numerical routine.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::Unsupported { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
