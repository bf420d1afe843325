//! Contract files → model inputs, and end-to-end detection.

use std::path::{Path, PathBuf};

use dvdet_core::ast::{build_weighted_graph, AstTree, RetentionTable, VulnRuleSet, WeightedCodeGraph};
use dvdet_core::cfg::{build_cfg, extract_paths, ControlFlowGraph, ControlFlowPath};
use dvdet_core::embed::{parse_external_embeddings, ExternalEmbedder, HashedEmbedder};
use dvdet_core::evm::{disassemble, Disassembly};
use dvdet_core::model::{BatchExecutor, DvDet, Sample};
use dvdet_core::nn::ParamStore;
use serde::Serialize;

use crate::ast_json::parse_ast;
use crate::bytecode::read_bytecode;
use crate::config::Config;
use crate::error::{AtStage, Result, Stage, StageError};
use crate::manifest::ManifestEntry;
use crate::rules::{load_retention, load_rules, select_rules};

/// The files describing one contract.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContractFiles {
    pub id: String,
    pub ast: Option<PathBuf>,
    pub source: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub bytecode: Option<PathBuf>,
}

impl From<&ManifestEntry> for ContractFiles {
    fn from(e: &ManifestEntry) -> ContractFiles {
        ContractFiles {
            id: e.id.clone(),
            ast: e.ast_path.clone(),
            source: e.source_path.clone(),
            embeddings: e.embeddings_path.clone(),
            bytecode: e.bytecode_path.clone(),
        }
    }
}

fn read_text(stage: Stage, path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| StageError::io(stage, path, e))
}

/// Configured preprocessing for both views.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: Config,
    pub rules: VulnRuleSet,
    pub retention: RetentionTable,
}

impl Pipeline {
    pub fn new(config: Config) -> Result<Pipeline> {
        let rules = select_rules(load_rules(config.rules_path.as_deref())?, &config.rule_set)?;
        let retention = load_retention(config.retention_path.as_deref())?;
        Ok(Pipeline {
            config,
            rules,
            retention,
        })
    }

    /// Parses an AST file and trims node fields to the retention table.
    pub fn tree(&self, ast: &Path, source: Option<&Path>) -> Result<AstTree> {
        let json = read_text(Stage::Ast, ast)?;
        let source = source.map(|p| read_text(Stage::Ast, p)).transpose()?;
        let tree = parse_ast(&json, source.as_deref()).at(Stage::Ast)?;
        Ok(self.retention.filter_tree(tree))
    }

    /// Importance-weighted graph with node features.
    pub fn graph(&self, ast: &Path, source: Option<&Path>, embeddings: Option<&Path>) -> Result<WeightedCodeGraph> {
        let tree = self.tree(ast, source)?;
        let fallback = HashedEmbedder::new(self.config.dims.node).at(Stage::Embed)?;
        let graph = match embeddings {
            None => build_weighted_graph(&tree, &self.rules, &fallback, self.config.graph_options()),
            Some(path) => {
                let parsed = parse_external_embeddings(&read_text(Stage::Embed, path)?).at(Stage::Embed)?;
                for w in &parsed.warnings {
                    log::warn!("{}: {w}", path.display());
                }
                if let Some(dim) = parsed.dim().filter(|d| *d != self.config.dims.node) {
                    return Err(StageError::input(
                        Stage::Embed,
                        format!("{} holds {dim}-wide vectors, node width is {}", path.display(), self.config.dims.node),
                    ));
                }
                let embedder = ExternalEmbedder::new(&parsed.vectors, fallback).at(Stage::Embed)?;
                build_weighted_graph(&tree, &self.rules, &embedder, self.config.graph_options())
            }
        };
        graph.at(Stage::Graph)
    }

    /// Reads and decodes contract code; decoding warnings are logged.
    pub fn disassemble(&self, bytecode: &Path) -> Result<Disassembly> {
        let code = read_bytecode(bytecode, self.config.strip_metadata)?;
        if code.is_empty() {
            return Err(StageError::input(Stage::Disasm, format!("{} holds no code", bytecode.display())));
        }
        let dis = disassemble(&code);
        for w in &dis.warnings {
            log::warn!("{}: {w}", bytecode.display());
        }
        Ok(dis)
    }

    /// Control flow graph with unreachable blocks removed.
    pub fn cfg(&self, bytecode: &Path) -> Result<ControlFlowGraph> {
        let dis = self.disassemble(bytecode)?;
        Ok(build_cfg(&dis.instructions).eliminate_dead_blocks())
    }

    pub fn paths(&self, bytecode: &Path) -> Result<Vec<ControlFlowPath>> {
        let paths = extract_paths(&self.cfg(bytecode)?, self.config.path_limits());
        if paths.is_empty() {
            return Err(StageError::input(Stage::Paths, format!("{} yields no paths", bytecode.display())));
        }
        Ok(paths)
    }

    /// Builds the views the configured mode uses.
    pub fn sample(&self, files: &ContractFiles, label: usize, label_source: &str) -> Result<Sample> {
        let mode = self.config.mode;
        let graph = if mode.uses_graph() {
            let ast = files.ast.as_deref().ok_or_else(|| {
                StageError::input(Stage::Ast, format!("contract `{}` has no AST file", files.id))
            })?;
            Some(self.graph(ast, files.source.as_deref(), files.embeddings.as_deref())?)
        } else {
            None
        };
        let paths = if mode.uses_sequence() {
            let code = files.bytecode.as_deref().ok_or_else(|| {
                StageError::input(Stage::Disasm, format!("contract `{}` has no bytecode file", files.id))
            })?;
            self.paths(code)?
        } else {
            Vec::new()
        };
        Ok(Sample {
            id: files.id.clone(),
            graph,
            paths,
            label,
            label_source: label_source.to_string(),
        })
    }

    /// Labelled samples for every manifest entry, built in parallel.
    pub fn manifest_samples<E: BatchExecutor>(&self, entries: &[ManifestEntry], exec: &E) -> Result<Vec<Sample>> {
        let classes = self.config.class_names();
        let built = exec.map(entries.len(), |i| {
            let e = &entries[i];
            let label = e.label_index(&classes, self.config.task)?;
            self.sample(&ContractFiles::from(e), label, e.label_source.as_deref().unwrap_or_default())
                .map_err(|err| StageError::new(err.stage, err.kind, format!("contract `{}`: {}", e.id, err.message)))
        });
        built.into_iter().collect()
    }
}

/// Detection result for one contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub id: String,
    pub task: String,
    pub mode: String,
    pub classes: Vec<String>,
    pub probabilities: Vec<f64>,
    pub predicted: usize,
    pub label: String,
    /// `‖x_graph‖`; 0 when the source view is disabled.
    pub graph_norm: f64,
    /// `‖h_seq‖`; 0 when the bytecode view is disabled.
    pub sequence_norm: f64,
}

/// Runs both views and the classifier on one contract.
pub fn detect(pipeline: &Pipeline, model: &DvDet, store: &ParamStore, files: &ContractFiles) -> Result<Detection> {
    let sample = pipeline.sample(files, 0, "")?;
    let p = model.predict(store, &sample).at(Stage::Detect)?;
    let classes = pipeline.config.class_names();
    Ok(Detection {
        id: p.id,
        task: pipeline.config.task.name().into(),
        mode: pipeline.config.mode.name().into(),
        label: classes[p.predicted].clone(),
        classes,
        probabilities: p.probabilities,
        predicted: p.predicted,
        graph_norm: p.graph_norm,
        sequence_norm: p.sequence_norm,
    })
}
