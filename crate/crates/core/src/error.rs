use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown {field} `{value}`; expected one of: {options}")]
    UnknownOption { field: &'static str, value: String, options: String },

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("{kind} is not supported by model `{model}`")]
    Unsupported { model: String, kind: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },

    #[error("CSV error at line {line}: {message}")]
    Csv { line: u64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn unknown(field: &'static str, value: &str, options: &[&str]) -> Self {
        Error::UnknownOption { field, value: value.to_string(), options: options.join(", ") }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        // serde_json reports missing fields as "missing field `x`"; surface the key by name.
        let msg = e.to_string();
        if let Some(rest) = msg.strip_prefix("missing field `") {
            if let Some(end) = rest.find('`') {
                return Error::MissingKey(rest[..end].to_string());
            }
        }
        Error::Json { line: e.line(), column: e.column(), message: msg }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        Error::Csv { line, message: e.to_string() }
    }
}
