use alloc::vec::Vec;

use crate::error::{dimension, domain};
use crate::Result;

/// Softmax with max subtraction.
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(domain("softmax of an empty vector"));
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = v.iter().map(|x| libm::exp(x - max)).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= sum);
    Ok(out)
}

/// Gradient of softmax inputs given the outputs `p` and upstream `dp`.
pub fn softmax_backward(p: &[f64], dp: &[f64]) -> Vec<f64> {
    let inner: f64 = p.iter().zip(dp).map(|(a, b)| a * b).sum();
    p.iter().zip(dp).map(|(pi, di)| pi * (di - inner)).collect()
}

const PROB_FLOOR: f64 = 1e-12;

/// `−Σ y·log p` for a one-hot `y`; `p` is clamped below at 1e-12.
pub fn cross_entropy(p: &[f64], y: &[f64]) -> Result<f64> {
    if p.len() != y.len() {
        return Err(dimension(alloc::format!(
            "cross entropy over {} probabilities and {} labels",
            p.len(),
            y.len()
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(domain(alloc::format!("probabilities sum to {sum}")));
    }
    let ones = y.iter().filter(|v| **v == 1.0).count();
    let zeros = y.iter().filter(|v| **v == 0.0).count();
    if ones != 1 || ones + zeros != y.len() {
        return Err(domain("label vector is not one-hot"));
    }
    Ok(p
        .iter()
        .zip(y)
        .filter(|(_, yi)| **yi == 1.0)
        .map(|(pi, _)| -libm::log(pi.max(PROB_FLOOR)))
        .sum())
}

/// Gradient of `cross_entropy(softmax(z), onehot(label))` with respect to `z`.
pub fn log_softmax_grad_from_probs(p: &[f64], label: usize) -> Vec<f64> {
    let mut g = p.to_vec();
    g[label] -= 1.0;
    g
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

pub fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        libm::expm1(x)
    }
}

/// Derivative of ELU at `x`.
pub fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        libm::exp(x)
    }
}

pub fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

pub fn leaky_relu_grad(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        slope
    }
}
