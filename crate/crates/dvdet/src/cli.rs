//! The `dvdet` command line.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dvdet_core::embed::{embed_node, EmbeddingTable};
use dvdet_core::model::{cross_validate, evaluate, train, BatchExecutor, DvDet, Task, ViewMode, OPCODE_TABLE};
use dvdet_core::nn::{ParamStore, Rng};

use crate::checkpoint;
use crate::config::Config;
use crate::error::{AtStage, Result, Stage, StageError};
use crate::exec::RayonExecutor;
use crate::inspect;
use crate::manifest::load_manifest;
use crate::pipeline::{detect, ContractFiles, Pipeline};
use crate::report::{BenchReport, Report, TrainReport, UnitTiming};
use crate::toy::{toy_corpus, write_corpus};

#[derive(Debug, Parser)]
#[command(name = "dvdet", version, about = "Dual-view smart contract vulnerability detection")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand; each overrides the config file.
#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output artifacts (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for initialization, shuffling and dropout.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-contract work.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true)]
    pub task: Option<TaskArg>,
    /// Rule set ranking syntax-tree nodes.
    #[arg(long, global = true)]
    pub rule_set: Option<String>,
    /// Rule-set file replacing the shipped one.
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Keep a trailing Solidity metadata blob in the code.
    #[arg(long, global = true)]
    pub no_strip: bool,
    /// Link consecutive statements of a block in the graph.
    #[arg(long, global = true)]
    pub sibling_edges: bool,
    #[arg(long, global = true)]
    pub max_paths: Option<usize>,
    /// Maximum blocks per control-flow path.
    #[arg(long, global = true)]
    pub max_len: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Dual,
    SourceOnly,
    BytecodeOnly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TaskArg {
    Existence,
    Type,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CfgFormat {
    Json,
    Dot,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode bytecode into instructions (JSON lines).
    Disasm { file: PathBuf },
    /// Build the control flow graph (JSON or DOT).
    Cfg {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: CfgFormat,
    },
    /// List control-flow paths, one opcode sequence per line.
    Paths { file: PathBuf },
    /// Build the importance-weighted graph of an AST file.
    Graph {
        ast: PathBuf,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Print feature vectors: node vectors for an AST (.json) file, opcode
    /// table rows for bytecode.
    Embed {
        file: PathBuf,
        /// Vector width (defaults to the configured node or opcode width).
        #[arg(long)]
        dim: Option<usize>,
        /// Read opcode rows from a trained checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Train on a manifest; writes model.ckpt, history.json and a report.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Held-out manifest for checkpoint selection and the report.
        #[arg(long)]
        validation: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        lr0: Option<f64>,
        /// Also run stratified k-fold cross-validation.
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        target_accuracy: Option<f64>,
    },
    /// Score a checkpoint on a labelled manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Classify one contract.
    Detect {
        #[arg(long)]
        ast: Option<PathBuf>,
        #[arg(long)]
        bytecode: Option<PathBuf>,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Contract id in the output (defaults to the input file stem).
        #[arg(long)]
        id: Option<String>,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Time detection per contract of a manifest.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Write a synthetic labelled corpus with a manifest.
    Toy {
        /// Contracts per class.
        #[arg(long, default_value_t = 5)]
        per_class: usize,
        /// Number of classes (2 to 4).
        #[arg(long, default_value_t = 4)]
        classes: usize,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct SourceArgs {
    /// Solidity source for per-node excerpts.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Precomputed node vectors (`id<TAB>values…`).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

impl GlobalArgs {
    fn apply(&self, cfg: &mut Config) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::Dual => ViewMode::Dual,
                ModeArg::SourceOnly => ViewMode::SourceOnly,
                ModeArg::BytecodeOnly => ViewMode::BytecodeOnly,
            };
        }
        if let Some(r) = &self.rule_set {
            cfg.rule_set = r.clone();
        }
        if let Some(r) = &self.rules {
            cfg.rules_path = Some(r.clone());
        }
        if self.no_strip {
            cfg.strip_metadata = false;
        }
        if self.sibling_edges {
            cfg.sibling_edges = true;
        }
        if let Some(n) = self.max_paths {
            cfg.max_paths = n;
        }
        if let Some(n) = self.max_len {
            cfg.max_blocks_per_path = n;
        }
    }

    /// Config file (or defaults) with every flag applied.
    fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        self.apply(&mut cfg);
        if let Some(t) = self.task {
            cfg.task = match t {
                TaskArg::Existence => Task::Existence,
                TaskArg::Type => Task::Type,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// A checkpoint's configuration with the flags that do not change the
    /// model's shape applied.
    fn checkpoint_config(&self, mut cfg: Config) -> Result<Config> {
        self.apply(&mut cfg);
        if let Some(t) = self.task {
            let wanted = match t {
                TaskArg::Existence => Task::Existence,
                TaskArg::Type => Task::Type,
            };
            if wanted != cfg.task {
                return Err(StageError::checkpoint(format!(
                    "checkpoint was trained for the {} task",
                    cfg.task.name()
                )));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Sends an artifact to `<out>/<name>` or, without `--out`, to stdout.
struct Sink<'a> {
    out: Option<&'a Path>,
}

impl Sink<'_> {
    fn ensure_dir(&self) -> Result<()> {
        if let Some(dir) = self.out {
            std::fs::create_dir_all(dir).map_err(|e| StageError::io(Stage::Output, dir, e))?;
        }
        Ok(())
    }

    /// Writes a file under `--out`; returns whether it did.
    fn file(&self, name: &str, contents: &[u8]) -> Result<bool> {
        match self.out {
            Some(dir) => {
                self.ensure_dir()?;
                let path = dir.join(name);
                std::fs::write(&path, contents).map_err(|e| StageError::io(Stage::Output, &path, e))?;
                log::info!("wrote {}", path.display());
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// Writes under `--out`, or prints.
    fn emit(&self, name: &str, contents: &str) -> Result<()> {
        if !self.file(name, contents.as_bytes())? {
            print!("{contents}");
        }
        Ok(())
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value).map_err(|e| StageError::invariant(Stage::Output, e))?;
    s.push('\n');
    Ok(s)
}

fn json_pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| StageError::invariant(Stage::Output, e))?;
    s.push('\n');
    Ok(s)
}

fn stem(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    name.split('.').next().unwrap_or_default().to_string()
}

pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let sink = Sink { out: g.out.as_deref() };
    match cli.command {
        Command::Disasm { file } => {
            let p = Pipeline::new(g.config()?)?;
            sink.emit("disasm.jsonl", &inspect::disasm_jsonl(&p.disassemble(&file)?.instructions))
        }
        Command::Cfg { file, format } => {
            let p = Pipeline::new(g.config()?)?;
            let cfg = p.cfg(&file)?;
            if sink.out.is_some() {
                sink.file("cfg.json", inspect::cfg_json(&cfg).as_bytes())?;
                sink.file("cfg.dot", inspect::cfg_dot(&cfg).as_bytes())?;
            } else {
                match format {
                    CfgFormat::Json => print!("{}", inspect::cfg_json(&cfg)),
                    CfgFormat::Dot => print!("{}", inspect::cfg_dot(&cfg)),
                }
            }
            Ok(())
        }
        Command::Paths { file } => {
            let p = Pipeline::new(g.config()?)?;
            sink.emit("paths.txt", &inspect::paths_text(&p.paths(&file)?))
        }
        Command::Graph { ast, source } => {
            let p = Pipeline::new(g.config()?)?;
            let graph = p.graph(&ast, source.source.as_deref(), source.embeddings.as_deref())?;
            sink.emit("graph.json", &inspect::graph_json(&graph))
        }
        Command::Embed {
            file,
            dim,
            checkpoint,
            source,
        } => cmd_embed(g, &sink, &file, dim, checkpoint.as_deref(), &source),
        Command::Train {
            manifest,
            validation,
            epochs,
            batch,
            lr0,
            folds,
            target_accuracy,
        } => {
            let mut cfg = g.config()?;
            if let Some(e) = epochs {
                cfg.epochs = e;
            }
            if let Some(b) = batch {
                cfg.batch = b;
            }
            if let Some(l) = lr0 {
                cfg.lr0 = l;
            }
            if let Some(f) = folds {
                cfg.folds = f;
            }
            if target_accuracy.is_some() {
                cfg.target_accuracy = target_accuracy;
            }
            cfg.validate()?;
            cmd_train(cfg, &sink, &manifest, validation.as_deref())
        }
        Command::Eval { manifest, checkpoint } => {
            let ckpt = checkpoint::load(&checkpoint)?;
            let cfg = g.checkpoint_config(ckpt.config)?;
            let model = DvDet::new(cfg.model_config()).at(Stage::Checkpoint)?;
            let p = Pipeline::new(cfg)?;
            let exec = RayonExecutor::new(p.config.workers)?;
            let samples = p.manifest_samples(&load_manifest(&manifest)?, &exec)?;
            if samples.is_empty() {
                return Err(StageError::input(Stage::Manifest, "no contracts to evaluate"));
            }
            let (metrics, predictions) = evaluate(&model, &ckpt.store, &samples, &exec).at(Stage::Eval)?;
            let report = Report::new(p.config.task.name(), p.config.mode.name(), &p.config.class_names(), &metrics);
            sink.file("report.json", json_pretty(&report)?.as_bytes())?;
            let lines: Vec<String> = predictions.iter().map(json_line).collect::<Result<_>>()?;
            sink.file("predictions.jsonl", lines.concat().as_bytes())?;
            sink.emit("report.txt", &Report::table(&[report]))
        }
        Command::Detect {
            ast,
            bytecode,
            checkpoint,
            id,
            source,
        } => {
            let ckpt = checkpoint::load(&checkpoint)?;
            let cfg = g.checkpoint_config(ckpt.config)?;
            let model = DvDet::new(cfg.model_config()).at(Stage::Checkpoint)?;
            let p = Pipeline::new(cfg)?;
            let id = id
                .or_else(|| ast.as_deref().or(bytecode.as_deref()).map(stem))
                .unwrap_or_else(|| "contract".into());
            let files = ContractFiles {
                id,
                ast,
                source: source.source,
                embeddings: source.embeddings,
                bytecode,
            };
            let detection = detect(&p, &model, &ckpt.store, &files)?;
            let line = json_line(&detection)?;
            sink.file("prediction.json", line.as_bytes())?;
            print!("{line}");
            Ok(())
        }
        Command::Bench { manifest, checkpoint } => cmd_bench(g, &sink, &manifest, &checkpoint),
        Command::Toy { per_class, classes } => {
            let dir = g
                .out
                .as_deref()
                .ok_or_else(|| StageError::input(Stage::Output, "toy needs --out"))?;
            if !(2..=4).contains(&classes) || per_class == 0 {
                return Err(StageError::input(Stage::Config, "toy needs 2 to 4 classes and at least one contract each"));
            }
            let manifest = write_corpus(dir, &toy_corpus(per_class, classes, g.seed.unwrap_or(0)))?;
            println!("{}", manifest.display());
            Ok(())
        }
    }
}

fn cmd_embed(
    g: &GlobalArgs,
    sink: &Sink,
    file: &Path,
    dim: Option<usize>,
    checkpoint: Option<&Path>,
    source: &SourceArgs,
) -> Result<()> {
    let is_ast = file.extension().is_some_and(|e| e == "json");
    if is_ast {
        let mut cfg = g.config()?;
        if let Some(d) = dim {
            cfg.dims.node = d;
        }
        cfg.validate()?;
        let p = Pipeline::new(cfg)?;
        let rows: Vec<(String, Vec<f64>)> = if source.embeddings.is_some() {
            let graph = p.graph(file, source.source.as_deref(), source.embeddings.as_deref())?;
            let d = graph.feature_dim();
            graph
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| (n.ast_id.to_string(), graph.features.data()[i * d..(i + 1) * d].to_vec()))
                .collect()
        } else {
            let tree = p.tree(file, source.source.as_deref())?;
            tree.nodes()
                .iter()
                .map(|n| (n.id.to_string(), embed_node(n, p.config.dims.node)))
                .collect()
        };
        let text = inspect::vectors_tsv(rows.iter().map(|(k, v)| (k.clone(), v.as_slice())));
        return sink.emit("embeddings.tsv", &text);
    }

    let (cfg, store) = match checkpoint {
        Some(path) => {
            let ckpt = checkpoint::load(path)?;
            let cfg = g.checkpoint_config(ckpt.config)?;
            if dim.is_some_and(|d| d != cfg.dims.opcode) {
                return Err(StageError::input(
                    Stage::Embed,
                    format!("checkpoint opcode width is {}", cfg.dims.opcode),
                ));
            }
            (cfg, Some(ckpt.store))
        }
        None => {
            let mut cfg = g.config()?;
            if let Some(d) = dim {
                cfg.dims.opcode = d;
            }
            cfg.validate()?;
            (cfg, None)
        }
    };
    let table = EmbeddingTable::opcodes(cfg.dims.opcode, cfg.dims.oov_buckets, OPCODE_TABLE).at(Stage::Embed)?;
    let store = match store {
        Some(s) => s,
        None => {
            let mut s = ParamStore::new();
            table.init(&mut s, &mut Rng::new(cfg.seed, 0)).at(Stage::Embed)?;
            s
        }
    };
    let p = Pipeline::new(cfg)?;
    let mut tokens: Vec<String> = Vec::new();
    for ins in p.disassemble(file)?.instructions {
        if !tokens.iter().any(|t| t == ins.mnemonic) {
            tokens.push(ins.mnemonic.to_string());
        }
    }
    let rows = table.embed_sequence(&store, &tokens).at(Stage::Embed)?;
    let width = rows.shape()[1];
    let text = inspect::vectors_tsv(
        tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), &rows.data()[i * width..(i + 1) * width])),
    );
    sink.emit("embeddings.tsv", &text)
}

fn cmd_train(cfg: Config, sink: &Sink, manifest: &Path, validation: Option<&Path>) -> Result<()> {
    if sink.out.is_none() {
        return Err(StageError::input(Stage::Train, "train needs --out for its checkpoint"));
    }
    sink.ensure_dir()?;
    let p = Pipeline::new(cfg)?;
    let cfg = &p.config;
    let exec = RayonExecutor::new(cfg.workers)?;
    let samples = p.manifest_samples(&load_manifest(manifest)?, &exec)?;
    let held_out = match validation {
        Some(v) => p.manifest_samples(&load_manifest(v)?, &exec)?,
        None => Vec::new(),
    };
    log::info!("{} training and {} validation contracts", samples.len(), held_out.len());
    let model = DvDet::new(cfg.model_config()).at(Stage::Train)?;
    let classes = cfg.class_names();
    let tc = cfg.train_config();

    if cfg.folds >= 2 {
        let folds = cross_validate(&model, &samples, cfg.folds, &tc, &exec).at(Stage::Train)?;
        let reports: Vec<Report> = folds
            .iter()
            .map(|f| {
                let mut r = Report::new(cfg.task.name(), cfg.mode.name(), &classes, &f.metrics);
                r.mode = format!("{} fold {}", cfg.mode.name(), f.fold);
                r
            })
            .collect();
        sink.file("folds.json", json_pretty(&reports)?.as_bytes())?;
        sink.file("folds.txt", Report::table(&reports).as_bytes())?;
    }

    let initial = model.init(cfg.seed).at(Stage::Train)?;
    let outcome = train(&model, initial, &samples, &held_out, &tc, &exec).at(Stage::Train)?;
    checkpoint::save(&sink.out.expect("checked").join("model.ckpt"), cfg, &outcome.best)?;
    let (evaluated_on, eval_set) = if held_out.is_empty() {
        ("training", &samples)
    } else {
        ("validation", &held_out)
    };
    let (metrics, _) = evaluate(&model, &outcome.best, eval_set, &exec).at(Stage::Eval)?;
    let report = Report::new(cfg.task.name(), cfg.mode.name(), &classes, &metrics);
    let full = TrainReport {
        history: &outcome.history,
        evaluated_on,
        report: &report,
    };
    sink.file("history.json", json_pretty(&full)?.as_bytes())?;
    sink.file("report.json", json_pretty(&report)?.as_bytes())?;
    sink.file("report.txt", Report::table(&[report]).as_bytes())?;
    Ok(())
}

fn cmd_bench(g: &GlobalArgs, sink: &Sink, manifest: &Path, checkpoint_path: &Path) -> Result<()> {
    let entries = load_manifest(manifest)?;
    let ckpt = checkpoint::load(checkpoint_path)?;
    let cfg = g.checkpoint_config(ckpt.config)?;
    let model = DvDet::new(cfg.model_config()).at(Stage::Checkpoint)?;
    let p = Pipeline::new(cfg)?;
    if entries.is_empty() {
        log::warn!("{}: manifest lists no contracts", manifest.display());
    }
    let exec = RayonExecutor::new(p.config.workers)?;
    let units = exec.map(entries.len(), |i| {
        let files = ContractFiles::from(&entries[i]);
        let start = Instant::now();
        let result = detect(&p, &model, &ckpt.store, &files);
        UnitTiming {
            id: files.id,
            seconds: start.elapsed().as_secs_f64(),
            error: result.err().map(|e| e.to_string()),
        }
    });
    let report = BenchReport::new(units);
    sink.file("bench.json", json_pretty(&report)?.as_bytes())?;
    sink.emit("bench.txt", &report.table())
}
