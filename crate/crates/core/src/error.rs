use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("WVD is not real: max |imag| / max |real| = {ratio:.3e}")]
    NonRealWvd { ratio: f64 },

    #[error("instantaneous frequency {freq} of component {component} at t = {time} is outside [0, 0.5)")]
    FrequencyOutOfBand {
        component: usize,
        time: usize,
        freq: f64,
    },

    #[error("parameter sampling for {class} rejected {attempts} consecutive draws")]
    SamplingExhausted { class: String, attempts: usize },

    #[error("non-finite loss at epoch {epoch}, batch {batch}; learning rate too high?")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: malformed file: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Error {
        let path = path.into();
        move |source| Error::Json { path, source }
    }
}
