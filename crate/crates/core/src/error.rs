use thiserror::Error;

/// Errors raised by the numerical kernels, the algorithms and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated an operation's documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A configuration file or CLI value was rejected.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        {
            let holds: bool = $cond;
            if !holds {
                return Err($crate::error::Error::pre(format!($($arg)+)));
            }
        }
    };
}
pub(crate) use ensure;
