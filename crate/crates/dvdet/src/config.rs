//! Run configuration: a TOML file whose every key is optional, plus command
//! line overrides applied on top.

use std::path::{Path, PathBuf};

use dvdet_core::ast::GraphOptions;
use dvdet_core::cfg::PathLimits;
use dvdet_core::egat::EgatConfig;
use dvdet_core::hyperagru::HyperAgruConfig;
use dvdet_core::model::{ModelConfig, Task, TrainConfig, ViewMode};
use dvdet_core::nn::AdamConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, Stage, StageError};

/// Model widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dims {
    /// Width of node feature vectors.
    pub node: usize,
    /// Output width of each graph-attention layer.
    pub egat: Vec<usize>,
    /// Width of opcode embeddings.
    pub opcode: usize,
    pub hidden: usize,
    pub gru_layers: usize,
    pub oov_buckets: usize,
}

impl Default for Dims {
    fn default() -> Dims {
        Dims {
            node: 768,
            egat: vec![256, 256, 128],
            opcode: 350,
            hidden: 256,
            gru_layers: 2,
            oov_buckets: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub mode: ViewMode,
    pub task: Task,
    /// Class names in label order; empty means the task's default set.
    pub classes: Vec<String>,
    pub epochs: usize,
    pub batch: usize,
    pub lr0: f64,
    pub dropout: f64,
    /// Negative slope of the attention LeakyReLU.
    pub slope: f64,
    pub dims: Dims,
    /// Which rule set ranks the syntax-tree nodes.
    pub rule_set: String,
    pub rules_path: Option<PathBuf>,
    pub retention_path: Option<PathBuf>,
    pub sibling_edges: bool,
    pub strip_metadata: bool,
    pub max_paths: usize,
    pub max_blocks_per_path: usize,
    /// Folds for cross-validation during `train`; 0 or 1 disables it.
    pub folds: usize,
    /// Stop training once validation accuracy reaches this value.
    pub target_accuracy: Option<f64>,
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            seed: 0,
            mode: ViewMode::Dual,
            task: Task::Type,
            classes: Vec::new(),
            epochs: 50,
            batch: 32,
            lr0: 0.01,
            dropout: 0.5,
            slope: 0.2,
            dims: Dims::default(),
            rule_set: "reentrancy".into(),
            rules_path: None,
            retention_path: None,
            sibling_edges: false,
            strip_metadata: true,
            max_paths: 32,
            max_blocks_per_path: 256,
            folds: 0,
            target_accuracy: None,
            workers: 1,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text).map_err(|e| StageError::input(Stage::Config, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`; relative rule/retention paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| StageError::io(Stage::Config, path, e))?;
        let mut cfg = Config::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.rules_path, &mut cfg.retention_path].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(StageError::input(Stage::Config, m));
        if self.batch == 0 {
            return bad("batch must be positive".into());
        }
        if !(self.lr0.is_finite() && self.lr0 >= 0.0) {
            return bad(format!("lr0 {} must be a non-negative number", self.lr0));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} must lie in [0, 1)", self.dropout));
        }
        let d = &self.dims;
        if d.node == 0 || d.opcode == 0 || d.hidden == 0 || d.gru_layers == 0 || d.egat.is_empty() || d.egat.contains(&0) {
            return bad("all dims must be positive and `dims.egat` non-empty".into());
        }
        if !self.classes.is_empty() && self.classes.len() < 2 {
            return bad("at least two classes are needed".into());
        }
        if self.task == Task::Existence && !self.classes.is_empty() && self.classes.len() != 2 {
            return bad("the existence task has exactly two classes".into());
        }
        Ok(())
    }

    /// Class names in label order.
    pub fn class_names(&self) -> Vec<String> {
        if self.classes.is_empty() {
            self.task.default_classes()
        } else {
            self.classes.clone()
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        let mut dims = vec![self.dims.node];
        dims.extend_from_slice(&self.dims.egat);
        ModelConfig {
            mode: self.mode,
            num_classes: self.class_names().len(),
            egat: EgatConfig {
                dims,
                slope: self.slope,
                dropout: self.dropout,
            },
            hyperagru: HyperAgruConfig {
                input_dim: self.dims.opcode,
                hidden_dim: self.dims.hidden,
                layers: self.dims.gru_layers,
                dropout: self.dropout,
            },
            oov_buckets: self.dims.oov_buckets,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            epochs: self.epochs,
            batch_size: self.batch,
            lr0: self.lr0,
            adam: AdamConfig::default(),
            target_accuracy: self.target_accuracy,
        }
    }

    pub fn path_limits(&self) -> PathLimits {
        PathLimits {
            max_paths: self.max_paths,
            max_blocks_per_path: self.max_blocks_per_path,
        }
    }

    pub fn graph_options(&self) -> GraphOptions {
        GraphOptions {
            sibling_edges: self.sibling_edges,
        }
    }
}
