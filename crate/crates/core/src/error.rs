use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Normalized entropies are undefined, so no quadrant can be assigned.
    #[error("cannot classify: {0}")]
    Classification(String),

    /// Unparseable input document.
    #[error("format error{}: {message}", location(.line, .field))]
    Format {
        line: Option<u64>,
        field: Option<String>,
        message: String,
    },

    /// Parsed input that violates a validation rule.
    #[error("validation error: {0}")]
    Validation(String),

    /// Regression could not be fitted.
    #[error("fit error: {0}")]
    Fit(String),

    /// Invalid simulation or run configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn location(line: &Option<u64>, field: &Option<String>) -> String {
    match (line, field) {
        (Some(l), Some(f)) => format!(" at line {l}, field `{f}`"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(f)) => format!(" in field `{f}`"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn format(line: Option<u64>, field: Option<&str>, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            field: field.map(str::to_owned),
            message: msg.into(),
        }
    }
}
