use std::path::PathBuf;

use drapegeom_core::Error as GeomError;

/// Errors of the file formats, configuration and command layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed input; `line` is 1-based for text formats and `offset` a
    /// byte offset for binary ones.
    #[error("{path}: {location}: {message}")]
    Parse { path: PathBuf, location: Location, message: String },
    #[error("{path}: unsupported: {message}")]
    UnsupportedFeature { path: PathBuf, message: String },
    #[error("{0}")]
    Geometry(#[from] GeomError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Offset(u64),
    Unknown,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Location::Line(l) => write!(f, "line {l}"),
            Location::Offset(o) => write!(f, "byte {o}"),
            Location::Unknown => f.write_str("input"),
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, location: Location, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), location, message: message.into() }
    }

    /// Whether the error came from reading or decoding input rather than from
    /// validating it.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Parse { .. } | Error::UnsupportedFeature { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
