use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty rasterization: shape support does not intersect the grid")]
    EmptyRasterization,

    #[error("empty support: no pixel mass above threshold {threshold}")]
    EmptySupport { threshold: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported composition: {0}")]
    UnsupportedComposition(String),

    #[error("partition depth exceeds support resolution: cell {address} at level {level} holds a single point of mass")]
    PartitionTooDeep { address: String, level: usize },

    #[error("density {index}: {source}")]
    AtDensity {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("transport solver: {0}")]
    Solver(String),

    #[error("k-NN graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_density(self, index: usize) -> Self {
        Error::AtDensity {
            index,
            source: Box::new(self),
        }
    }
}
