use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = EvafError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EvafError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: timestamp {t} precedes previous timestamp {previous}")]
    TimestampRegression { line: usize, t: u64, previous: u64 },

    #[error("pixel ({x}, {y}) outside {width}x{height} sensor")]
    PixelOutOfBounds { x: u32, y: u32, width: u32, height: u32 },

    #[error("timestamp {t} outside sweep range [{t_start}, {t_end}]")]
    OutsideSweep { t: f64, t_start: u64, t_end: u64 },

    #[error("invalid window [{a}, {b}]: start after end")]
    InvertedWindow { a: f64, b: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no events to focus on")]
    EmptyStream,

    #[error("frame {width}x{height} is smaller than the {kernel}x{kernel} kernel of the {measure} measure")]
    FrameTooSmall {
        width: usize,
        height: usize,
        kernel: usize,
        measure: &'static str,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Serde(#[from] serde_json::Error),
}

impl EvafError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EvafError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        EvafError::InvalidParameter(message.into())
    }
}
