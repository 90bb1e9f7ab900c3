use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the range where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation hit an exact pole of a response function.
    #[error("singular response: {0}")]
    Singularity(String),

    /// A time step is too coarse for the dynamics it has to resolve.
    #[error("time step {dt:.3e} s exceeds the resolution limit {limit:.3e} s set by {constraint}")]
    Resolution {
        dt: f64,
        limit: f64,
        constraint: &'static str,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error{}{}: {message}", key.as_ref().map(|k| format!(" for key `{k}`")).unwrap_or_default(), line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        key: Option<String>,
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: Some(key.into()),
            line,
            message: msg.into(),
        }
    }

    /// Process exit status used by the command-line runner.
    ///
    /// 2 for anything the user can fix in the configuration, 3 for numerical
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) | Error::Resolution { .. } => 2,
            Error::Singularity(_) | Error::Numerical(_) => 3,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
