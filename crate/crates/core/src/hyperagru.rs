//! Attention-pooled GRU over opcode sequences.
//!
//! Each layer runs the gated recurrence
//!
//! ```text
//! z = σ(W_z·[h_{t−1}, x_t] + b_z)
//! r = σ(W_r·[h_{t−1}, x_t] + b_r)
//! h̃ = tanh(W_h·[r ⊙ h_{t−1}, x_t] + b_h)
//! h_t = (1 − z) ⊙ h_{t−1} + z ⊙ h̃
//! ```
//!
//! from `h_0 = 0`, feeding its states to the next layer. The last layer's
//! states are pooled with `a = softmax_t(uᵀh_t)`, `ĥ = Σ_t a_t h_t`; several
//! paths of one contract are averaged.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dimension, domain};
use crate::nn::{axpy, dot, glorot_uniform, matvec, matvec_t_acc, outer_acc, sigmoid, softmax, softmax_backward};
use crate::nn::{Grads, Mode, ParamStore, Rng, Tensor};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct HyperAgruConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    /// Dropout rate on the states passed between layers (training only).
    pub dropout: f64,
}

impl Default for HyperAgruConfig {
    fn default() -> HyperAgruConfig {
        HyperAgruConfig {
            input_dim: 350,
            hidden_dim: 256,
            layers: 2,
            dropout: 0.5,
        }
    }
}

/// Borrowed weights of one GRU layer. Matrices are `hidden × (hidden + input)`
/// and act on `[h, x]` concatenations.
#[derive(Debug, Clone, Copy)]
pub struct GruParams<'a> {
    pub w_z: &'a Tensor,
    pub w_r: &'a Tensor,
    pub w_h: &'a Tensor,
    pub b_z: &'a Tensor,
    pub b_r: &'a Tensor,
    pub b_h: &'a Tensor,
}

impl GruParams<'_> {
    pub fn hidden(&self) -> usize {
        self.w_z.rows()
    }

    pub fn input(&self) -> usize {
        self.w_z.cols() - self.hidden()
    }

    fn check(&self) -> Result<()> {
        let hidden = self.w_z.rows();
        let width = self.w_z.cols();
        if self.w_z.shape().len() != 2 || width < hidden {
            return Err(dimension(format!("W_z has shape {:?}", self.w_z.shape())));
        }
        for (name, m) in [("W_r", self.w_r), ("W_h", self.w_h)] {
            if m.shape() != self.w_z.shape() {
                return Err(dimension(format!("{name} {:?} differs from W_z {:?}", m.shape(), self.w_z.shape())));
            }
        }
        for (name, b) in [("b_z", self.b_z), ("b_r", self.b_r), ("b_h", self.b_h)] {
            if b.len() != hidden {
                return Err(dimension(format!("{name} has length {}, expected {hidden}", b.len())));
            }
        }
        Ok(())
    }
}

/// Values of one recurrence step kept for backpropagation.
#[derive(Debug, Clone)]
struct StepCache {
    h_prev: Vec<f64>,
    /// `[h_prev, x]`
    hx: Vec<f64>,
    /// `[r ⊙ h_prev, x]`
    rhx: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    h_tilde: Vec<f64>,
}

fn gru_step(x: &[f64], h_prev: &[f64], p: &GruParams) -> Result<(Vec<f64>, StepCache)> {
    p.check()?;
    let hidden = p.hidden();
    if h_prev.len() != hidden || x.len() != p.input() {
        return Err(dimension(format!(
            "GRU step got state {} and input {}, expected {hidden} and {}",
            h_prev.len(),
            x.len(),
            p.input()
        )));
    }
    let mut hx = Vec::with_capacity(hidden + x.len());
    hx.extend_from_slice(h_prev);
    hx.extend_from_slice(x);
    let gate = |w: &Tensor, b: &Tensor, v: &[f64]| -> Vec<f64> {
        matvec(w, v).iter().zip(b.data()).map(|(a, b)| a + b).collect()
    };
    let z: Vec<f64> = gate(p.w_z, p.b_z, &hx).into_iter().map(sigmoid).collect();
    let r: Vec<f64> = gate(p.w_r, p.b_r, &hx).into_iter().map(sigmoid).collect();
    let mut rhx = hx.clone();
    for (v, ri) in rhx[..hidden].iter_mut().zip(&r) {
        *v *= ri;
    }
    let h_tilde: Vec<f64> = gate(p.w_h, p.b_h, &rhx).into_iter().map(libm::tanh).collect();
    let h = (0..hidden)
        .map(|k| (1.0 - z[k]) * h_prev[k] + z[k] * h_tilde[k])
        .collect();
    let cache = StepCache {
        h_prev: h_prev.to_vec(),
        hx,
        rhx,
        z,
        r,
        h_tilde,
    };
    Ok((h, cache))
}

/// One gated recurrence step.
pub fn gru_cell(x: &[f64], h_prev: &[f64], params: &GruParams) -> Result<Vec<f64>> {
    gru_step(x, h_prev, params).map(|(h, _)| h)
}

/// Attention pooling over the rows of `h` (`L × hidden`). Returns the pooled
/// vector and the attention weights.
pub fn attention_pool(h: &Tensor, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if h.shape().len() != 2 || h.rows() == 0 {
        return Err(domain("attention pooling over an empty sequence"));
    }
    if u.len() != h.cols() {
        return Err(dimension(format!("attention vector length {} vs state width {}", u.len(), h.cols())));
    }
    let scores: Vec<f64> = (0..h.rows()).map(|t| dot(u, h.row(t))).collect();
    let a = softmax(&scores)?;
    let mut out = vec![0.0; h.cols()];
    for (t, &at) in a.iter().enumerate() {
        axpy(at, h.row(t), &mut out);
    }
    Ok((out, a))
}

/// Element-wise mean of per-path vectors.
pub fn pool_paths(vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = vectors.first().ok_or_else(|| domain("no path vectors to pool"))?;
    let mut out = vec![0.0; first.len()];
    for v in vectors {
        if v.len() != out.len() {
            return Err(dimension(format!("path vector width {} vs {}", v.len(), out.len())));
        }
        axpy(1.0, v, &mut out);
    }
    let n = vectors.len() as f64;
    out.iter_mut().for_each(|x| *x /= n);
    Ok(out)
}

/// Forward values of one sequence.
#[derive(Debug, Clone)]
pub struct HyperAgruTrace {
    steps: Vec<Vec<StepCache>>,
    /// Dropout masks applied to each non-final layer's states.
    masks: Vec<Option<Tensor>>,
    top: Tensor,
    attention: Vec<f64>,
    output: Vec<f64>,
}

impl HyperAgruTrace {
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn attention(&self) -> &[f64] {
        &self.attention
    }

    /// Final-layer hidden states, one row per step.
    pub fn states(&self) -> &Tensor {
        &self.top
    }
}

/// Stacked GRU with attention pooling. Parameters are
/// `{prefix}.gru{l}.{w_z,w_r,w_h,b_z,b_r,b_h}` and `{prefix}.pool.u`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperAgru {
    prefix: String,
    config: HyperAgruConfig,
}

const GATES: [&str; 6] = ["w_z", "w_r", "w_h", "b_z", "b_r", "b_h"];

impl HyperAgru {
    pub fn new(prefix: &str, config: HyperAgruConfig) -> Result<HyperAgru> {
        if config.input_dim == 0 || config.hidden_dim == 0 || config.layers == 0 {
            return Err(domain("HyperAGRU needs positive input width, hidden width and layer count"));
        }
        if !(0.0..1.0).contains(&config.dropout) {
            return Err(domain(format!("dropout rate {} outside [0, 1)", config.dropout)));
        }
        Ok(HyperAgru {
            prefix: prefix.into(),
            config,
        })
    }

    pub fn config(&self) -> &HyperAgruConfig {
        &self.config
    }

    pub fn output_dim(&self) -> usize {
        self.config.hidden_dim
    }

    fn layer_input(&self, layer: usize) -> usize {
        if layer == 0 {
            self.config.input_dim
        } else {
            self.config.hidden_dim
        }
    }

    pub fn param_name(&self, layer: usize, gate: &str) -> String {
        format!("{}.gru{layer}.{gate}", self.prefix)
    }

    pub fn pool_name(&self) -> String {
        format!("{}.pool.u", self.prefix)
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (0..self.config.layers)
            .flat_map(|l| GATES.iter().map(move |g| (l, *g)))
            .map(|(l, g)| self.param_name(l, g))
            .collect();
        names.push(self.pool_name());
        names
    }

    /// Glorot-uniform matrices and pooling vector, zero biases.
    pub fn init(&self, store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
        let h = self.config.hidden_dim;
        for l in 0..self.config.layers {
            let width = h + self.layer_input(l);
            for g in &GATES[..3] {
                store.insert(&self.param_name(l, g), glorot_uniform(&[h, width], width, h, rng))?;
            }
            for g in &GATES[3..] {
                store.insert(&self.param_name(l, g), Tensor::zeros(&[h]))?;
            }
        }
        store.insert(&self.pool_name(), glorot_uniform(&[h], h, 1, rng))
    }

    pub fn layer_params<'s>(&self, store: &'s ParamStore, layer: usize) -> Result<GruParams<'s>> {
        let get = |g: &str| store.value(&self.param_name(layer, g));
        Ok(GruParams {
            w_z: get("w_z")?,
            w_r: get("w_r")?,
            w_h: get("w_h")?,
            b_z: get("b_z")?,
            b_r: get("b_r")?,
            b_h: get("b_h")?,
        })
    }

    /// Encodes a `len × input_dim` sequence.
    pub fn forward(&self, store: &ParamStore, seq: &Tensor, mode: &mut Mode) -> Result<HyperAgruTrace> {
        if seq.shape().len() != 2 || seq.rows() == 0 {
            return Err(domain("HyperAGRU needs a non-empty sequence"));
        }
        if seq.cols() != self.config.input_dim {
            return Err(dimension(format!("sequence width {} vs input width {}", seq.cols(), self.config.input_dim)));
        }
        let len = seq.rows();
        let hidden = self.config.hidden_dim;
        let mut steps = Vec::with_capacity(self.config.layers);
        let mut masks = Vec::with_capacity(self.config.layers);
        let mut input = seq.clone();
        for l in 0..self.config.layers {
            let p = self.layer_params(store, l)?;
            if p.hidden() != hidden || p.input() != self.layer_input(l) {
                return Err(dimension(format!("GRU layer {l} parameters do not match the configured widths")));
            }
            let mut states = Tensor::zeros(&[len, hidden]);
            let mut caches = Vec::with_capacity(len);
            let mut h = vec![0.0; hidden];
            for t in 0..len {
                let (next, cache) = gru_step(input.row(t), &h, &p)?;
                states.row_mut(t).copy_from_slice(&next);
                caches.push(cache);
                h = next;
            }
            let mask = if l + 1 < self.config.layers {
                mode.mask(states.shape(), self.config.dropout)?
            } else {
                None
            };
            if let Some(m) = &mask {
                for (v, k) in states.data_mut().iter_mut().zip(m.data()) {
                    *v *= k;
                }
            }
            steps.push(caches);
            masks.push(mask);
            input = states;
        }
        let u = store.value(&self.pool_name())?;
        let (output, attention) = attention_pool(&input, u.data())?;
        Ok(HyperAgruTrace {
            steps,
            masks,
            top: input,
            attention,
            output,
        })
    }

    /// Accumulates parameter gradients for upstream `d_out` on the pooled
    /// vector and returns the gradient of the input sequence.
    pub fn backward(&self, store: &ParamStore, trace: &HyperAgruTrace, d_out: &[f64], grads: &mut Grads) -> Result<Tensor> {
        let hidden = self.config.hidden_dim;
        if d_out.len() != hidden {
            return Err(dimension(format!("pooled gradient length {} vs {hidden}", d_out.len())));
        }
        let len = trace.top.rows();
        let u = store.value(&self.pool_name())?;

        // Attention pooling.
        let mut d_states = Tensor::zeros(&[len, hidden]);
        let mut d_att = Vec::with_capacity(len);
        for t in 0..len {
            axpy(trace.attention[t], d_out, d_states.row_mut(t));
            d_att.push(dot(d_out, trace.top.row(t)));
        }
        let d_scores = softmax_backward(&trace.attention, &d_att);
        {
            let du = grads.entry(store, &self.pool_name())?;
            for (t, &ds) in d_scores.iter().enumerate() {
                axpy(ds, trace.top.row(t), du.data_mut());
                axpy(ds, u.data(), d_states.row_mut(t));
            }
        }

        // Recurrent layers, top to bottom.
        for l in (0..self.config.layers).rev() {
            if let Some(m) = &trace.masks[l] {
                for (g, k) in d_states.data_mut().iter_mut().zip(m.data()) {
                    *g *= k;
                }
            }
            d_states = self.layer_backward(store, l, &trace.steps[l], &d_states, grads)?;
        }
        Ok(d_states)
    }

    /// BPTT through one layer given gradients on its emitted states; returns
    /// gradients on its inputs.
    fn layer_backward(
        &self,
        store: &ParamStore,
        layer: usize,
        steps: &[StepCache],
        d_states: &Tensor,
        grads: &mut Grads,
    ) -> Result<Tensor> {
        let p = self.layer_params(store, layer)?;
        let hidden = p.hidden();
        let width = p.w_z.cols();
        let mut acc: Vec<Tensor> = GATES
            .iter()
            .map(|g| core::mem::replace(grads.entry(store, &self.param_name(layer, g)).expect("registered"), Tensor::zeros(&[0])))
            .collect();
        let mut d_input = Tensor::zeros(&[steps.len(), width - hidden]);
        let mut dh_next = vec![0.0; hidden];
        let mut d_concat = vec![0.0; width];
        for t in (0..steps.len()).rev() {
            let c = &steps[t];
            let mut dh = d_states.row(t).to_vec();
            axpy(1.0, &dh_next, &mut dh);

            let mut dh_prev: Vec<f64> = (0..hidden).map(|k| dh[k] * (1.0 - c.z[k])).collect();
            let da_z: Vec<f64> = (0..hidden)
                .map(|k| dh[k] * (c.h_tilde[k] - c.h_prev[k]) * c.z[k] * (1.0 - c.z[k]))
                .collect();
            let da_h: Vec<f64> = (0..hidden)
                .map(|k| dh[k] * c.z[k] * (1.0 - c.h_tilde[k] * c.h_tilde[k]))
                .collect();

            // Candidate path: W_h acts on [r ⊙ h_prev, x].
            outer_acc(&mut acc[2], &da_h, &c.rhx);
            axpy(1.0, &da_h, acc[5].data_mut());
            d_concat.iter_mut().for_each(|v| *v = 0.0);
            matvec_t_acc(p.w_h, &da_h, &mut d_concat);
            let mut da_r = vec![0.0; hidden];
            for k in 0..hidden {
                let d_rh = d_concat[k];
                dh_prev[k] += d_rh * c.r[k];
                da_r[k] = d_rh * c.h_prev[k] * c.r[k] * (1.0 - c.r[k]);
            }
            axpy(1.0, &d_concat[hidden..], d_input.row_mut(t));

            // Gates: W_z and W_r act on [h_prev, x].
            outer_acc(&mut acc[0], &da_z, &c.hx);
            axpy(1.0, &da_z, acc[3].data_mut());
            outer_acc(&mut acc[1], &da_r, &c.hx);
            axpy(1.0, &da_r, acc[4].data_mut());
            d_concat.iter_mut().for_each(|v| *v = 0.0);
            matvec_t_acc(p.w_z, &da_z, &mut d_concat);
            matvec_t_acc(p.w_r, &da_r, &mut d_concat);
            axpy(1.0, &d_concat[..hidden], &mut dh_prev);
            axpy(1.0, &d_concat[hidden..], d_input.row_mut(t));

            dh_next = dh_prev;
        }
        for (g, t) in GATES.iter().zip(acc) {
            *grads.entry(store, &self.param_name(layer, g))? = t;
        }
        Ok(d_input)
    }
}

/// Gradient of [`pool_paths`] for each of `count` inputs.
pub fn pool_paths_backward(d: &[f64], count: usize) -> Vec<f64> {
    let scale = 1.0 / count as f64;
    d.iter().map(|v| v * scale).collect()
}
