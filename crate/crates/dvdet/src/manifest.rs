//! Dataset manifests: JSON lines, one contract per line.

use std::path::{Path, PathBuf};

use dvdet_core::model::Task;
use serde::{Deserialize, Serialize};

use crate::error::{Result, Stage, StageError};

/// One manifest line. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    #[serde(default)]
    pub ast_path: Option<PathBuf>,
    #[serde(default)]
    pub bytecode_path: Option<PathBuf>,
    /// Class name; required for training and evaluation.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub label_source: Option<String>,
    #[serde(default)]
    pub solc_version: Option<String>,
    /// Solidity source, used for per-node source excerpts.
    #[serde(default)]
    pub source_path: Option<PathBuf>,
    /// Precomputed node vectors (`id<TAB>values…`).
    #[serde(default)]
    pub embeddings_path: Option<PathBuf>,
}

impl ManifestEntry {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.ast_path,
            &mut self.bytecode_path,
            &mut self.source_path,
            &mut self.embeddings_path,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Label index among `classes`. For the existence task a type-level name
    /// (any non-safe class of the type task) counts as vulnerable.
    pub fn label_index(&self, classes: &[String], task: Task) -> Result<usize> {
        let label = self
            .label
            .as_deref()
            .ok_or_else(|| StageError::input(Stage::Manifest, format!("contract `{}` has no label", self.id)))?;
        if let Some(i) = classes.iter().position(|c| c == label) {
            return Ok(i);
        }
        if task == Task::Existence && Task::Type.default_classes().iter().skip(1).any(|c| c == label) {
            return Ok(1);
        }
        Err(StageError::input(
            Stage::Manifest,
            format!("contract `{}` has label `{label}`, not one of {}", self.id, classes.join(", ")),
        ))
    }
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut out: Vec<ManifestEntry> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut entry: ManifestEntry = serde_json::from_str(line)
            .map_err(|e| StageError::input(Stage::Manifest, format!("line {}: {e}", i + 1)))?;
        if out.iter().any(|o| o.id == entry.id) {
            return Err(StageError::input(Stage::Manifest, format!("line {}: duplicate id `{}`", i + 1, entry.id)));
        }
        entry.resolve(base);
        out.push(entry);
    }
    Ok(out)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| StageError::io(Stage::Manifest, path, e))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}
