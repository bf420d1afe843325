use super::ParamStore;
use crate::error::domain;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam update of every parameter, then zeroes the gradients.
///
/// `t` is the 1-based step index. Every parameter must carry a gradient;
/// nothing is modified when one is missing.
pub fn adam_step(store: &mut ParamStore, lr: f64, cfg: AdamConfig, t: u64) -> Result<()> {
    if t == 0 {
        return Err(domain("Adam step index starts at 1"));
    }
    if let Some((name, _)) = store.iter().find(|(_, p)| p.grad.is_none()) {
        return Err(Error::MissingGradient(name.into()));
    }
    let t = t as f64;
    let c1 = 1.0 - libm::pow(cfg.beta1, t);
    let c2 = 1.0 - libm::pow(cfg.beta2, t);
    for (_, p) in store.iter_mut() {
        let grad = p.grad.as_mut().expect("checked above");
        let w = p.value.data_mut();
        let m = p.adam_m.data_mut();
        let v = p.adam_v.data_mut();
        for i in 0..w.len() {
            let g = grad.data()[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            w[i] -= lr * m_hat / (libm::sqrt(v_hat) + cfg.eps);
        }
        grad.fill(0.0);
    }
    Ok(())
}

/// Cosine annealing from `lr0` at step 0 down to 0 at `total_steps`.
pub fn cosine_lr(step: u64, total_steps: u64, lr0: f64) -> Result<f64> {
    if total_steps == 0 || step > total_steps {
        return Err(domain(alloc::format!(
            "cosine schedule step {step} outside 0..={total_steps}"
        )));
    }
    let frac = step as f64 / total_steps as f64;
    Ok(0.5 * lr0 * (1.0 + libm::cos(core::f64::consts::PI * frac)))
}
