use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("canvas below minimum: {width}x{height} (need at least {min}x{min})")]
    CanvasTooSmall { width: usize, height: usize, min: usize },

    #[error("dimension mismatch: {expected:?} vs {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("degenerate texture: sample variance {variance:e} below {min_variance:e}")]
    DegenerateTexture { variance: f64, min_variance: f64 },

    #[error("empty mask under the 'error' empty-set policy")]
    EmptyMask,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: malformed affinity file: {reason}")]
    MalformedAffinity { path: PathBuf, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("manifest: {0}")]
    Manifest(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image {
            path: path.into(),
            source,
        }
    }
}
