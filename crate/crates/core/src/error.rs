use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can surface. Each variant maps onto a stable
/// machine-readable code (see [`Error::code`]) used by the CLI and the C API.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("frame mismatch: anchor at frame {anchor}, target at frame {target}")]
    FrameMismatch { anchor: i64, target: i64 },
    #[error("missing frames: {0}")]
    MissingFrames(String),
    #[error("window length mismatch: expected {expected} frames, got {actual}")]
    WindowLengthMismatch { expected: usize, actual: usize },
    #[error("model shape mismatch: {0}")]
    ModelShapeMismatch(String),
    #[error("empty group at frame {0}")]
    EmptyGroup(i64),
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("feature length mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("non-finite feature {feature} in sample {sample}")]
    InvalidFeature { sample: usize, feature: usize },
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("{location}: {message}")]
    Parse { location: Location, message: String },
    #[error("dangling reference: {0}")]
    Referential(String),
    #[error("annotation conflict: {0}")]
    AnnotationConflict(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("label coverage: {0}")]
    LabelCoverage(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

/// Source position attached to parse errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub file: String,
    pub line: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.file)
        } else {
            write!(f, "{}:{}", self.file, self.line)
        }
    }
}

impl Error {
    pub fn parse(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            location: Location {
                file: file.into(),
                line,
            },
            message: message.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Error::InsufficientData(_) => "INSUFFICIENT_DATA",
            Error::FrameMismatch { .. } => "FRAME_MISMATCH",
            Error::MissingFrames(_) => "MISSING_FRAMES",
            Error::WindowLengthMismatch { .. } => "WINDOW_LENGTH_MISMATCH",
            Error::ModelShapeMismatch(_) => "MODEL_SHAPE_MISMATCH",
            Error::EmptyGroup(_) => "EMPTY_GROUP",
            Error::EmptyTrainingSet => "EMPTY_TRAINING_SET",
            Error::ShapeMismatch { .. } => "SHAPE_MISMATCH",
            Error::InvalidFeature { .. } => "INVALID_FEATURE",
            Error::CorruptModel(_) => "CORRUPT_MODEL",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::Referential(_) => "REFERENTIAL_ERROR",
            Error::AnnotationConflict(_) => "ANNOTATION_CONFLICT",
            Error::Config(_) => "CONFIG_ERROR",
            Error::InvalidParams(_) => "INVALID_PARAMS",
            Error::LabelCoverage(_) => "LABEL_COVERAGE_ERROR",
            Error::Io { .. } => "IO_ERROR",
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) => 2,
            Error::ModelShapeMismatch(_) | Error::ShapeMismatch { .. } => 3,
            Error::Parse { .. }
            | Error::Referential(_)
            | Error::AnnotationConflict(_)
            | Error::CorruptModel(_) => 4,
            Error::Io { .. } => 5,
            _ => 1,
        }
    }
}
