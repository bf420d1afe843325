//! File formats, preprocessing pipeline, checkpoints, reports and the
//! command-line tool around [`dvdet_core`].

pub mod ast_json;
pub mod bytecode;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod inspect;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod rules;
pub mod toy;

pub use error::{ErrorKind, Result, Stage, StageError};
