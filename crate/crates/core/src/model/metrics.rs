use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::domain;
use crate::Result;

/// Confusion-matrix statistics. Rows are true classes, columns predictions;
/// class 0 is the safe class.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub confusion: Vec<Vec<u64>>,
    pub support: Vec<u64>,
    pub total: u64,
    pub accuracy: f64,
    /// `TP / (TP + FN)`; `None` for classes without support.
    pub recall: Vec<Option<f64>>,
    /// Per-class one-vs-rest accuracy: `(TP + TN) / total`.
    pub one_vs_rest_accuracy: Vec<f64>,
    /// Accuracy of the safe-vs-vulnerable decision implied by the predictions.
    pub existence_accuracy: f64,
    pub mean_loss: f64,
}

impl Metrics {
    pub fn from_confusion(confusion: Vec<Vec<u64>>, mean_loss: f64) -> Result<Metrics> {
        let k = confusion.len();
        if k == 0 || confusion.iter().any(|r| r.len() != k) {
            return Err(domain("confusion matrix must be square and non-empty"));
        }
        let support: Vec<u64> = confusion.iter().map(|r| r.iter().sum()).collect();
        let total: u64 = support.iter().sum();
        if total == 0 {
            return Err(domain("metrics over zero samples"));
        }
        let n = total as f64;
        let trace: u64 = (0..k).map(|c| confusion[c][c]).sum();
        let recall = (0..k)
            .map(|c| (support[c] > 0).then(|| confusion[c][c] as f64 / support[c] as f64))
            .collect();
        let one_vs_rest_accuracy = (0..k)
            .map(|c| {
                let predicted: u64 = confusion.iter().map(|r| r[c]).sum();
                let tp = confusion[c][c];
                let tn = total + tp - support[c] - predicted;
                (tp + tn) as f64 / n
            })
            .collect();
        let mut existence_correct = 0;
        for (y, row) in confusion.iter().enumerate() {
            for (p, &count) in row.iter().enumerate() {
                if (y == 0) == (p == 0) {
                    existence_correct += count;
                }
            }
        }
        Ok(Metrics {
            support,
            total,
            accuracy: trace as f64 / n,
            recall,
            one_vs_rest_accuracy,
            existence_accuracy: existence_correct as f64 / n,
            mean_loss,
            confusion,
        })
    }

    /// Builds metrics from `(label, prediction, loss)` triples.
    pub fn from_outcomes(classes: usize, outcomes: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Metrics> {
        let mut confusion = vec![vec![0u64; classes]; classes];
        let mut loss = 0.0;
        let mut count = 0usize;
        for (y, p, l) in outcomes {
            if y >= classes || p >= classes {
                return Err(domain(format!("class index outside 0..{classes}")));
            }
            confusion[y][p] += 1;
            loss += l;
            count += 1;
        }
        let mean = if count == 0 { 0.0 } else { loss / count as f64 };
        Metrics::from_confusion(confusion, mean)
    }
}
