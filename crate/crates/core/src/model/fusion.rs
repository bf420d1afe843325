use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dimension, domain};
use crate::nn::{cross_entropy, softmax, Tensor};
use crate::Result;

/// Class probabilities `softmax((x_graph ∥ h_seq)·W + b)` with `W` of shape
/// `(graph + seq) × classes`.
pub fn fuse_predict(x_graph: &[f64], h_seq: &[f64], w: &Tensor, b: &Tensor) -> Result<Vec<f64>> {
    softmax(&fuse_logits(x_graph, h_seq, w, b)?)
}

pub(crate) fn fuse_logits(x_graph: &[f64], h_seq: &[f64], w: &Tensor, b: &Tensor) -> Result<Vec<f64>> {
    let width = x_graph.len() + h_seq.len();
    if w.shape().len() != 2 || w.rows() != width || b.len() != w.cols() {
        return Err(dimension(format!(
            "fusion weights {:?} and bias {:?} do not fit a {width}-wide input",
            w.shape(),
            b.shape()
        )));
    }
    let mut logits = b.data().to_vec();
    for (i, v) in x_graph.iter().chain(h_seq).enumerate() {
        if *v != 0.0 {
            for (l, wi) in logits.iter_mut().zip(w.row(i)) {
                *l += v * wi;
            }
        }
    }
    Ok(logits)
}

/// Gradients of the fusion layer given `d_logits`: adds into `dw`, `db` and
/// returns the gradient of the concatenated input.
pub(crate) fn fuse_backward(v: &[f64], w: &Tensor, d_logits: &[f64], dw: &mut Tensor, db: &mut Tensor) -> Vec<f64> {
    let mut dv = vec![0.0; v.len()];
    for (i, &vi) in v.iter().enumerate() {
        let row = dw.row_mut(i);
        for (g, d) in row.iter_mut().zip(d_logits) {
            *g += vi * d;
        }
        dv[i] = w.row(i).iter().zip(d_logits).map(|(a, b)| a * b).sum();
    }
    for (g, d) in db.data_mut().iter_mut().zip(d_logits) {
        *g += d;
    }
    dv
}

/// Cross-entropy of `p` against class `y`.
pub fn loss(p: &[f64], y: usize) -> Result<f64> {
    if y >= p.len() {
        return Err(domain(format!("label {y} outside {} classes", p.len())));
    }
    let mut onehot = vec![0.0; p.len()];
    onehot[y] = 1.0;
    cross_entropy(p, &onehot)
}

/// Mean loss over a batch of `(p, y)` pairs.
pub fn batch_loss(batch: &[(Vec<f64>, usize)]) -> Result<f64> {
    if batch.is_empty() {
        return Err(domain("loss of an empty batch"));
    }
    let mut sum = 0.0;
    for (p, y) in batch {
        sum += loss(p, *y)?;
    }
    Ok(sum / batch.len() as f64)
}
