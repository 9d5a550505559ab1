use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Core(#[from] scdcnn_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("external data required: {0}")]
    ExternalData(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error at byte {offset}: {message}")]
    Parse {
        path: PathBuf,
        offset: u64,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// CLI exit status: 2 config, 3 missing external data, 4 I/O and files.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Core(_) => 2,
            Error::ExternalData(_) => 3,
            Error::Io { .. } | Error::Parse { .. } | Error::Format { .. } => 4,
        }
    }
}
