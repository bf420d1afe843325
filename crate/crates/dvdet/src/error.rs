use std::fmt;

use dvdet_core::Error as CoreError;

/// Pipeline stage an error is attributed to; printed as the error prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Manifest,
    Disasm,
    Cfg,
    Paths,
    Ast,
    Graph,
    Embed,
    Checkpoint,
    Train,
    Eval,
    Detect,
    Bench,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Manifest => "manifest",
            Stage::Disasm => "disasm",
            Stage::Cfg => "cfg",
            Stage::Paths => "paths",
            Stage::Ast => "ast",
            Stage::Graph => "graph",
            Stage::Embed => "embed",
            Stage::Checkpoint => "checkpoint",
            Stage::Train => "train",
            Stage::Eval => "eval",
            Stage::Detect => "detect",
            Stage::Bench => "bench",
            Stage::Output => "output",
        };
        f.write_str(name)
    }
}

/// What went wrong, which decides the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable or malformed input (exit 2).
    Input,
    /// Missing, corrupt or incompatible checkpoint (exit 3).
    Checkpoint,
    /// A broken internal invariant (exit 4).
    Invariant,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Input => 2,
            ErrorKind::Checkpoint => 3,
            ErrorKind::Invariant => 4,
        }
    }
}

/// A single-line `stage: message` error.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct StageError {
    pub stage: Stage,
    pub kind: ErrorKind,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, StageError>;

impl StageError {
    pub fn new(stage: Stage, kind: ErrorKind, message: impl fmt::Display) -> StageError {
        // Keep the report on one line whatever the source message looks like.
        let message = message.to_string().replace(['\n', '\r'], " ");
        StageError { stage, kind, message }
    }

    pub fn input(stage: Stage, message: impl fmt::Display) -> StageError {
        StageError::new(stage, ErrorKind::Input, message)
    }

    pub fn checkpoint(message: impl fmt::Display) -> StageError {
        StageError::new(Stage::Checkpoint, ErrorKind::Checkpoint, message)
    }

    pub fn invariant(stage: Stage, message: impl fmt::Display) -> StageError {
        StageError::new(stage, ErrorKind::Invariant, message)
    }

    /// Classifies a library error raised while running `stage`.
    pub fn core(stage: Stage, err: CoreError) -> StageError {
        let kind = match (&err, stage) {
            (_, Stage::Checkpoint) => ErrorKind::Checkpoint,
            (CoreError::Dimension(_) | CoreError::UnknownParameter(_) | CoreError::MissingGradient(_), _) => {
                ErrorKind::Invariant
            }
            _ => ErrorKind::Input,
        };
        StageError::new(stage, kind, err)
    }

    /// Wraps an IO failure on `path`; a missing file reads "file not found".
    pub fn io(stage: Stage, path: &std::path::Path, err: std::io::Error) -> StageError {
        let what = match err.kind() {
            std::io::ErrorKind::NotFound => "file not found".to_string(),
            _ => err.to_string(),
        };
        StageError::input(stage, format!("{what} ({})", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

/// Attaches a stage to library results.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T> AtStage<T> for std::result::Result<T, CoreError> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|e| StageError::core(stage, e))
    }
}
