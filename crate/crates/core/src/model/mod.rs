//! Dual-view fusion, loss, training and evaluation.
//!
//! The graph readout and the pooled sequence vector are concatenated and
//! classified by one softmax layer. A disabled view contributes a zero
//! vector of its usual width, so parameter shapes do not depend on the mode.

mod data;
mod fusion;
mod metrics;
mod network;
mod train;

pub use data::{kfold_split, Sample, Task, ViewMode};
pub use fusion::{batch_loss, fuse_predict, loss};
pub use metrics::Metrics;
pub use network::{argmax, DvDet, Forward, ModelConfig, Prediction, SampleGradients, FUSION_B, FUSION_W, OPCODE_TABLE};
pub use train::{
    cross_validate, evaluate, train, BatchExecutor, EpochRecord, FoldResult, History, Sequential, TrainConfig,
    TrainOutcome,
};
