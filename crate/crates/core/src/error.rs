use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive depth {depth} (must exceed {epsilon})")]
    NonPositiveDepth { depth: f64, epsilon: f64 },

    #[error("temporal context requires matching cameras, got {source_cam} and {target_cam}")]
    CameraMismatch { source_cam: usize, target_cam: usize },

    #[error("unknown camera id {0}")]
    UnknownCamera(usize),

    #[error("map of size {height}x{width} is too small for this operation")]
    DegenerateSize { height: usize, width: usize },

    #[error("no valid pixels remain for {0}")]
    AllInvalid(&'static str),

    #[error("input map is constant (min = max = {0}); min-max normalization is undefined")]
    ConstantMap(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("spatial size {0} is not divisible by 4")]
    NonDivisibleSpatial(usize),

    #[error("no ground-truth pixel inside [{min_depth}, {max_depth}]")]
    NoValidGroundTruth { min_depth: f64, max_depth: f64 },

    #[error("loss term `{0}` has a positive weight but no inputs")]
    MissingTerm(&'static str),

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {field}: {message}", path.display())]
    Parse {
        path: PathBuf,
        field: String,
        message: String,
    },
}

impl Error {
    /// Stable variant name, used by the CLI and the C API.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonPositiveDepth { .. } => "NonPositiveDepth",
            Error::CameraMismatch { .. } => "CameraMismatch",
            Error::UnknownCamera(_) => "UnknownCamera",
            Error::DegenerateSize { .. } => "DegenerateSize",
            Error::AllInvalid(_) => "AllInvalid",
            Error::ConstantMap(_) => "ConstantMap",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NonDivisibleSpatial(_) => "NonDivisibleSpatial",
            Error::NoValidGroundTruth { .. } => "NoValidGroundTruth",
            Error::MissingTerm(_) => "MissingTerm",
            Error::InvalidTransform(_) => "InvalidTransform",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io { .. } => "Io",
            Error::Parse { .. } => "Parse",
        }
    }

    /// True for errors caused by unreadable or malformed inputs rather than
    /// by the computation itself.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Parse { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}
