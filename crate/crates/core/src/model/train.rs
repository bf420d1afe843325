use alloc::format;
use alloc::vec::Vec;

use super::data::{kfold_split, Sample};
use super::fusion::loss;
use super::metrics::Metrics;
use super::network::{DvDet, Prediction, SampleGradients};
use crate::error::domain;
use crate::nn::{adam_step, cosine_lr, AdamConfig, ParamStore, Rng};
use crate::Result;

/// Optimization settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub adam: AdamConfig,
    /// Stop after the first epoch whose validation accuracy reaches this
    /// value. The learning-rate schedule still spans all `epochs`.
    pub target_accuracy: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            seed: 0,
            epochs: 50,
            batch_size: 32,
            lr0: 0.01,
            adam: AdamConfig::default(),
            target_accuracy: None,
        }
    }
}

/// Runs independent per-sample jobs; results come back in job order.
pub trait BatchExecutor {
    fn map<R, F>(&self, jobs: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl BatchExecutor for Sequential {
    fn map<R, F>(&self, jobs: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        (0..jobs).map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean training loss with dropout active.
    pub train_loss: f64,
    /// Learning rate of the epoch's last step.
    pub learning_rate: f64,
    pub validation: Option<Metrics>,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (`None`: initial parameters).
    pub best_epoch: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters after the last epoch.
    pub last: ParamStore,
    /// Best parameters by validation accuracy (ties: lower validation loss);
    /// the last parameters when there is no validation set.
    pub best: ParamStore,
    pub history: History,
}

/// Salt separating the dropout streams from initialization and shuffling.
const DROPOUT_SEED_SALT: u64 = 0xD80F_0u64;
const SHUFFLE_STREAM: u64 = 1;

/// Mini-batch Adam with cosine annealing over `epochs × batches` steps.
pub fn train<E: BatchExecutor>(
    model: &DvDet,
    initial: ParamStore,
    samples: &[Sample],
    validation: &[Sample],
    config: &TrainConfig,
    exec: &E,
) -> Result<TrainOutcome> {
    if samples.is_empty() {
        return Err(domain("empty training set"));
    }
    if config.batch_size == 0 {
        return Err(domain("batch size must be positive"));
    }
    model.check_store(&initial)?;
    let mut store = initial;
    let batches = samples.len().div_ceil(config.batch_size);
    let total_steps = (config.epochs * batches) as u64;
    let mut shuffle_rng = Rng::new(config.seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = History::default();
    let mut best: Option<(f64, f64, ParamStore)> = None;
    let mut step: u64 = 0;

    for epoch in 1..=config.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut lr = config.lr0;
        for batch in order.chunks(config.batch_size) {
            let base = step * config.batch_size as u64;
            let results: Vec<Result<SampleGradients>> = exec.map(batch.len(), |k| {
                let mut rng = Rng::new(config.seed ^ DROPOUT_SEED_SALT, base + k as u64);
                model.sample_gradients(&store, &samples[batch[k]], Some(&mut rng))
            });
            store.zero_grads();
            let scale = 1.0 / batch.len() as f64;
            for r in results {
                let r = r?;
                loss_sum += r.loss;
                store.accumulate(&r.grads, scale)?;
            }
            lr = cosine_lr(step, total_steps, config.lr0)?;
            step += 1;
            adam_step(&mut store, lr, config.adam, step)?;
        }
        let validation_metrics = if validation.is_empty() {
            None
        } else {
            let (m, _) = evaluate(model, &store, validation, exec)?;
            let better = match &best {
                None => true,
                Some((acc, l, _)) => m.accuracy > *acc || (m.accuracy == *acc && m.mean_loss < *l),
            };
            if better {
                best = Some((m.accuracy, m.mean_loss, store.clone()));
                history.best_epoch = Some(epoch);
            }
            Some(m)
        };
        let reached = match (config.target_accuracy, &validation_metrics) {
            (Some(target), Some(m)) => m.accuracy >= target,
            _ => false,
        };
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / samples.len() as f64,
            learning_rate: lr,
            validation: validation_metrics,
        });
        if reached {
            break;
        }
    }
    let best = match best {
        Some((_, _, b)) => b,
        None => {
            history.best_epoch = history.epochs.last().map(|e| e.epoch);
            store.clone()
        }
    };
    Ok(TrainOutcome {
        last: store,
        best,
        history,
    })
}

/// Evaluation-mode metrics and per-sample predictions.
pub fn evaluate<E: BatchExecutor>(
    model: &DvDet,
    store: &ParamStore,
    samples: &[Sample],
    exec: &E,
) -> Result<(Metrics, Vec<Prediction>)> {
    if samples.is_empty() {
        return Err(domain("nothing to evaluate"));
    }
    model.check_store(store)?;
    let preds: Vec<Result<Prediction>> = exec.map(samples.len(), |i| model.predict(store, &samples[i]));
    let preds = preds.into_iter().collect::<Result<Vec<_>>>()?;
    let mut outcomes = Vec::with_capacity(samples.len());
    for (s, p) in samples.iter().zip(&preds) {
        outcomes.push((s.label, p.predicted, loss(&p.probabilities, s.label)?));
    }
    Ok((Metrics::from_outcomes(model.config().num_classes, outcomes)?, preds))
}

/// Result of one cross-validation fold.
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub train_ids: Vec<usize>,
    pub validation_ids: Vec<usize>,
    pub history: History,
    pub metrics: Metrics,
    pub best: ParamStore,
}

/// Stratified k-fold cross-validation; each fold starts from the same seeded
/// initialization and is scored with its best parameters.
pub fn cross_validate<E: BatchExecutor>(
    model: &DvDet,
    samples: &[Sample],
    k: usize,
    config: &TrainConfig,
    exec: &E,
) -> Result<Vec<FoldResult>> {
    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let folds = kfold_split(&labels, k, config.seed)?;
    let mut out = Vec::with_capacity(k);
    for (fold, (train_ids, val_ids)) in folds.into_iter().enumerate() {
        let pick = |ids: &[usize]| ids.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
        let (tr, va) = (pick(&train_ids), pick(&val_ids));
        let outcome = train(model, model.init(config.seed)?, &tr, &va, config, exec)
            .map_err(|e| domain(format!("fold {fold}: {e}")))?;
        let (metrics, _) = evaluate(model, &outcome.best, &va, exec)?;
        out.push(FoldResult {
            fold,
            train_ids,
            validation_ids: val_ids,
            history: outcome.history,
            metrics,
            best: outcome.best,
        });
    }
    Ok(out)
}
