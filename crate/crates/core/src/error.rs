use alloc::string::String;

/// Errors produced by the detection pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed textual bytecode.
    #[error("invalid hex input at position {position}: {reason}")]
    Hex { position: usize, reason: String },

    /// Malformed syntax tree.
    #[error("malformed AST at {path}: {reason}")]
    Ast { path: String, reason: String },

    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes that do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Malformed external data such as an embedding file.
    #[error("format error at line {line}: {reason}")]
    Format { line: usize, reason: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("parameter `{0}` has no gradient")]
    MissingGradient(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn dimension(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
