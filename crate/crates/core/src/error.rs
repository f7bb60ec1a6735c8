use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "wavelength {wavelength_nm:.3} nm is outside the validity range \
         [{min_nm:.1}, {max_nm:.1}] nm of material `{material}`"
    )]
    Validity {
        material: String,
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("scan format error: {0}")]
    Format(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for numeric-contract failures, 1 for I/O and scan-format errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownMaterial(_) => 2,
            Error::Validity { .. } | Error::Contract(_) => 3,
            Error::Format(_) | Error::Io { .. } => 1,
        }
    }
}
