use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] lognav_core::Error),
    #[error(transparent)]
    Nn(#[from] lognav_nn::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("image: {0}")]
    Image(#[from] image::ImageError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("environment {env}: {source}")]
    Env {
        env: usize,
        #[source]
        source: lognav_core::Error,
    },
    #[error("non-finite {what} during update: {diagnostics}")]
    NonFinite { what: String, diagnostics: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}
