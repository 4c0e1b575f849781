use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: unsupported or corrupt image: {message}")]
    ImageFormat { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dataset layout: {0}")]
    Layout(String),

    #[error("class `{0}` has no images")]
    EmptyClass(&'static str),

    #[error("cannot stratify: {0}")]
    Stratification(String),

    #[error("value {0} outside [-1, 1]")]
    Domain(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate image: {0}")]
    DegenerateImage(String),

    #[error("haar bank: {0}")]
    Bank(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("feature tables not aligned; missing ids: {}", .missing.join(", "))]
    Alignment { missing: Vec<String> },

    #[error("training: {0}")]
    Training(String),

    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
