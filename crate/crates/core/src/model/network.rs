use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::data::{Sample, ViewMode};
use super::fusion::{fuse_backward, fuse_logits, loss};
use crate::egat::{graph_readout, graph_readout_backward, Egat, EgatConfig, EgatTrace};
use crate::embed::EmbeddingTable;
use crate::error::{dimension, domain};
use crate::hyperagru::{pool_paths, pool_paths_backward, HyperAgru, HyperAgruConfig, HyperAgruTrace};
use crate::nn::{glorot_uniform, log_softmax_grad_from_probs, softmax, Grads, Mode, ParamStore, Rng, Tensor};
use crate::Result;

pub const FUSION_W: &str = "fusion.w";
pub const FUSION_B: &str = "fusion.b";
pub const OPCODE_TABLE: &str = "opcode_table";
const GRAPH_PREFIX: &str = "egat";
const SEQUENCE_PREFIX: &str = "hyperagru";
const INIT_STREAM: u64 = 0;

/// Shapes of the whole model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct ModelConfig {
    pub mode: ViewMode,
    pub num_classes: usize,
    pub egat: EgatConfig,
    pub hyperagru: HyperAgruConfig,
    /// Hash buckets for opcode tokens outside the pinned table.
    pub oov_buckets: usize,
}

impl Default for ModelConfig {
    fn default() -> ModelConfig {
        ModelConfig {
            mode: ViewMode::Dual,
            num_classes: 4,
            egat: EgatConfig::default(),
            hyperagru: HyperAgruConfig::default(),
            oov_buckets: 8,
        }
    }
}

/// Per-contract output.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prediction {
    pub id: String,
    pub probabilities: Vec<f64>,
    pub predicted: usize,
    /// `‖x_graph‖` (0 when the view is disabled).
    pub graph_norm: f64,
    /// `‖h_seq‖` (0 when the view is disabled).
    pub sequence_norm: f64,
}

/// Forward values of one sample.
#[derive(Debug, Clone)]
pub struct Forward {
    pub probabilities: Vec<f64>,
    pub graph_vector: Vec<f64>,
    pub sequence_vector: Vec<f64>,
    graph: Option<(usize, EgatTrace)>,
    paths: Vec<(Vec<String>, HyperAgruTrace)>,
}

/// Loss and parameter gradients of one sample.
#[derive(Debug, Clone)]
pub struct SampleGradients {
    pub loss: f64,
    pub predicted: usize,
    pub grads: Grads,
}

/// Dual-view detector: graph encoder, sequence encoder, opcode table and
/// fusion classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct DvDet {
    config: ModelConfig,
    egat: Egat,
    agru: HyperAgru,
    table: EmbeddingTable,
}

impl DvDet {
    pub fn new(config: ModelConfig) -> Result<DvDet> {
        if config.num_classes < 2 {
            return Err(domain("a classifier needs at least two classes"));
        }
        let egat = Egat::new(GRAPH_PREFIX, config.egat.clone())?;
        let agru = HyperAgru::new(SEQUENCE_PREFIX, config.hyperagru.clone())?;
        let table = EmbeddingTable::opcodes(config.hyperagru.input_dim, config.oov_buckets, OPCODE_TABLE)?;
        Ok(DvDet {
            config,
            egat,
            agru,
            table,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn table(&self) -> &EmbeddingTable {
        &self.table
    }

    pub fn graph_dim(&self) -> usize {
        self.egat.output_dim()
    }

    pub fn sequence_dim(&self) -> usize {
        self.agru.output_dim()
    }

    /// Parameters of the source view.
    pub fn graph_param_names(&self) -> Vec<String> {
        self.egat.param_names()
    }

    /// Parameters of the bytecode view, including the opcode table.
    pub fn sequence_param_names(&self) -> Vec<String> {
        let mut names = self.agru.param_names();
        names.push(OPCODE_TABLE.into());
        names
    }

    /// Every parameter name with its expected shape.
    pub fn expected_shapes(&self) -> Result<Vec<(String, Vec<usize>)>> {
        let store = self.init(0)?;
        Ok(store.iter().map(|(n, p)| (n.into(), p.value.shape().to_vec())).collect())
    }

    /// Fresh parameters; all views are always registered so checkpoints have
    /// the same layout in every mode.
    pub fn init(&self, seed: u64) -> Result<ParamStore> {
        let mut rng = Rng::new(seed, INIT_STREAM);
        let mut store = ParamStore::new();
        self.egat.init(&mut store, &mut rng)?;
        self.agru.init(&mut store, &mut rng)?;
        self.table.init(&mut store, &mut rng)?;
        let width = self.graph_dim() + self.sequence_dim();
        let c = self.config.num_classes;
        store.insert(FUSION_W, glorot_uniform(&[width, c], width, c, &mut rng))?;
        store.insert(FUSION_B, Tensor::zeros(&[c]))?;
        Ok(store)
    }

    /// Rejects stores whose names or shapes differ from this model's.
    pub fn check_store(&self, store: &ParamStore) -> Result<()> {
        let expected = self.expected_shapes()?;
        for (name, shape) in &expected {
            let got = store.value(name)?;
            if got.shape() != shape.as_slice() {
                return Err(dimension(format!("parameter `{name}` has shape {:?}, model needs {shape:?}", got.shape())));
            }
        }
        if store.len() != expected.len() {
            let extra = store.names().find(|n| expected.iter().all(|(e, _)| e != n)).unwrap_or_default();
            return Err(dimension(format!("unexpected parameter `{extra}`")));
        }
        Ok(())
    }

    pub fn forward(&self, store: &ParamStore, sample: &Sample, mode: &mut Mode) -> Result<Forward> {
        let (graph_vector, graph) = if self.config.mode.uses_graph() {
            let g = sample
                .graph
                .as_ref()
                .ok_or_else(|| domain(format!("sample `{}` has no source graph", sample.id)))?;
            if g.feature_dim() != self.egat.input_dim() {
                return Err(dimension(format!(
                    "sample `{}` has {}-wide node features, model expects {}",
                    sample.id,
                    g.feature_dim(),
                    self.egat.input_dim()
                )));
            }
            let trace = self.egat.forward(store, g, mode)?;
            (graph_readout(trace.output())?, Some((g.node_count(), trace)))
        } else {
            (vec![0.0; self.graph_dim()], None)
        };

        let mut paths = Vec::new();
        let sequence_vector = if self.config.mode.uses_sequence() {
            if sample.paths.is_empty() {
                return Err(domain(format!("sample `{}` has no control-flow paths", sample.id)));
            }
            let mut vectors = Vec::with_capacity(sample.paths.len());
            for p in &sample.paths {
                let seq = self.table.embed_sequence(store, &p.opcodes)?;
                let trace = self.agru.forward(store, &seq, mode)?;
                vectors.push(trace.output().to_vec());
                paths.push((p.opcodes.clone(), trace));
            }
            pool_paths(&vectors)?
        } else {
            vec![0.0; self.sequence_dim()]
        };

        let logits = fuse_logits(
            &graph_vector,
            &sequence_vector,
            store.value(FUSION_W)?,
            store.value(FUSION_B)?,
        )?;
        Ok(Forward {
            probabilities: softmax(&logits)?,
            graph_vector,
            sequence_vector,
            graph,
            paths,
        })
    }

    /// Gradients of the cross-entropy loss for class `label`.
    pub fn backward(&self, store: &ParamStore, fwd: &Forward, label: usize, grads: &mut Grads) -> Result<()> {
        if label >= self.config.num_classes {
            return Err(domain(format!("label {label} outside {} classes", self.config.num_classes)));
        }
        let d_logits = log_softmax_grad_from_probs(&fwd.probabilities, label);
        let mut v = fwd.graph_vector.clone();
        v.extend_from_slice(&fwd.sequence_vector);
        let w = store.value(FUSION_W)?;
        let mut dw = core::mem::replace(grads.entry(store, FUSION_W)?, Tensor::zeros(&[0]));
        let mut db = core::mem::replace(grads.entry(store, FUSION_B)?, Tensor::zeros(&[0]));
        let dv = fuse_backward(&v, w, &d_logits, &mut dw, &mut db);
        *grads.entry(store, FUSION_W)? = dw;
        *grads.entry(store, FUSION_B)? = db;
        let (d_graph, d_seq) = dv.split_at(self.graph_dim());

        if let Some((nodes, trace)) = &fwd.graph {
            self.egat
                .backward(store, trace, &graph_readout_backward(d_graph, *nodes), grads)?;
        }
        if !fwd.paths.is_empty() {
            let d_path = pool_paths_backward(d_seq, fwd.paths.len());
            for (tokens, trace) in &fwd.paths {
                let d_input = self.agru.backward(store, trace, &d_path, grads)?;
                self.table.backward(store, tokens, &d_input, grads)?;
            }
        }
        Ok(())
    }

    /// Forward and backward for one sample; `rng` enables dropout.
    pub fn sample_gradients(&self, store: &ParamStore, sample: &Sample, rng: Option<&mut Rng>) -> Result<SampleGradients> {
        let mut mode = match rng {
            Some(r) => Mode::Train(r),
            None => Mode::Eval,
        };
        let fwd = self.forward(store, sample, &mut mode)?;
        let mut grads = Grads::new();
        self.backward(store, &fwd, sample.label, &mut grads)?;
        Ok(SampleGradients {
            loss: loss(&fwd.probabilities, sample.label)?,
            predicted: argmax(&fwd.probabilities),
            grads,
        })
    }

    /// Evaluation-mode prediction.
    pub fn predict(&self, store: &ParamStore, sample: &Sample) -> Result<Prediction> {
        let fwd = self.forward(store, sample, &mut Mode::Eval)?;
        let norm = |v: &[f64]| libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        Ok(Prediction {
            id: sample.id.clone(),
            predicted: argmax(&fwd.probabilities),
            graph_norm: norm(&fwd.graph_vector),
            sequence_norm: norm(&fwd.sequence_vector),
            probabilities: fwd.probabilities,
        })
    }
}

/// Index of the largest entry; the first wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}
