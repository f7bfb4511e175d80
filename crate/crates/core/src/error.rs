use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {message}")]
    Order { line: usize, message: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("frame is {width}x{height}, minimum is {min_width}x{min_height}")]
    Dimension {
        width: u32,
        height: u32,
        min_width: u32,
        min_height: u32,
    },

    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("no board region found")]
    NoBoardFound,

    #[error("no sheet region found")]
    NoSheetFound,

    #[error("cannot match {0} frame against {1} frame")]
    MediaTypeMismatch(String, String),

    #[error("invalid match probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("degenerate regression system: {0}")]
    DegenerateSystem(String),

    #[error("frame {frame_id}: {source}")]
    Frame {
        frame_id: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn for_frame(self, frame_id: u64) -> Self {
        Error::Frame {
            frame_id,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input files rather than internal faults.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Frame { source, .. } => source.is_input_error(),
            Error::Io(e) => e.kind() == std::io::ErrorKind::NotFound,
            Error::Json(_) => false,
            _ => true,
        }
    }
}
