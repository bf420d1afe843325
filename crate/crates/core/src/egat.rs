//! Edge-aware graph attention over a [`WeightedCodeGraph`].
//!
//! One layer computes `H = X·W`, scores every pair in a node's closed
//! neighbourhood as `e_ij = LeakyReLU((aᵀH_i + aᵀH_j) · S_ij)`, normalizes
//! the scores with a softmax and emits `ELU(Σ_j α_ij H_j)`. The self-loop
//! uses the node's own tier value as `S_ii`. Several layers are stacked
//! with dropout in between; the graph vector is the mean of the final rows.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ast::WeightedCodeGraph;
use crate::error::{dimension, domain};
use crate::nn::{elu, elu_grad, glorot_uniform, leaky_relu, leaky_relu_grad, softmax, softmax_backward};
use crate::nn::{axpy, dot, Grads, Mode, ParamStore, Rng, Tensor};
use crate::Result;

/// Layer widths and nonlinearity settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct EgatConfig {
    /// Input width followed by each layer's output width.
    pub dims: Vec<usize>,
    /// Negative slope of the LeakyReLU applied to attention scores.
    pub slope: f64,
    /// Dropout rate between layers (training only).
    pub dropout: f64,
}

impl Default for EgatConfig {
    fn default() -> EgatConfig {
        EgatConfig {
            dims: vec![768, 256, 256, 128],
            slope: 0.2,
            dropout: 0.5,
        }
    }
}

/// Intermediate values of one layer, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct LayerCache {
    input: Tensor,
    h: Tensor,
    /// Pre-activation scores, aligned with the neighbourhood lists.
    z: Vec<Vec<f64>>,
    alpha: Vec<Vec<f64>>,
    pre: Tensor,
    out: Tensor,
}

impl LayerCache {
    pub fn output(&self) -> &Tensor {
        &self.out
    }

    /// Attention weights of node `i`, aligned with its neighbourhood list
    /// (neighbours first, self-loop last).
    pub fn attention(&self, i: usize) -> &[f64] {
        &self.alpha[i]
    }
}

/// One edge-aware attention layer; `neighborhoods` comes from
/// [`WeightedCodeGraph::neighborhoods`].
pub fn egat_layer_forward(
    neighborhoods: &[Vec<(usize, f64)>],
    x: &Tensor,
    w: &Tensor,
    a: &Tensor,
    slope: f64,
) -> Result<LayerCache> {
    let n = neighborhoods.len();
    if x.shape().len() != 2 || x.rows() != n {
        return Err(dimension(format!("input {:?} does not have {n} rows", x.shape())));
    }
    if w.shape().len() != 2 || w.rows() != x.cols() {
        return Err(dimension(format!("weight {:?} cannot map width {}", w.shape(), x.cols())));
    }
    if a.len() != w.cols() {
        return Err(dimension(format!("attention vector has length {}, expected {}", a.len(), w.cols())));
    }
    let h = x.matmul(w)?;
    let s: Vec<f64> = (0..n).map(|i| dot(a.data(), h.row(i))).collect();
    let mut z = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut pre = Tensor::zeros(&[n, w.cols()]);
    for (i, nb) in neighborhoods.iter().enumerate() {
        let zi: Vec<f64> = nb.iter().map(|&(j, sij)| (s[i] + s[j]) * sij).collect();
        let e: Vec<f64> = zi.iter().map(|&v| leaky_relu(v, slope)).collect();
        let ai = softmax(&e)?;
        let row = pre.row_mut(i);
        for (&(j, _), &aij) in nb.iter().zip(&ai) {
            axpy(aij, h.row(j), row);
        }
        z.push(zi);
        alpha.push(ai);
    }
    let mut out = pre.clone();
    out.data_mut().iter_mut().for_each(|v| *v = elu(*v));
    Ok(LayerCache {
        input: x.clone(),
        h,
        z,
        alpha,
        pre,
        out,
    })
}

/// Gradients of one layer. Adds `dW` and `da` into the given buffers and
/// returns `dX` when `need_input_grad` is set.
#[allow(clippy::too_many_arguments)]
fn egat_layer_backward(
    neighborhoods: &[Vec<(usize, f64)>],
    cache: &LayerCache,
    w: &Tensor,
    a: &Tensor,
    slope: f64,
    d_out: &Tensor,
    dw: &mut Tensor,
    da: &mut Tensor,
    need_input_grad: bool,
) -> Result<Option<Tensor>> {
    let n = neighborhoods.len();
    let width = w.cols();
    let mut d_pre = d_out.clone();
    for (g, p) in d_pre.data_mut().iter_mut().zip(cache.pre.data()) {
        *g *= elu_grad(*p);
    }
    let mut dh = Tensor::zeros(&[n, width]);
    let mut ds = vec![0.0; n];
    for (i, nb) in neighborhoods.iter().enumerate() {
        let dpi = d_pre.row(i);
        let alpha = &cache.alpha[i];
        let mut dalpha = Vec::with_capacity(nb.len());
        for (&(j, _), &aij) in nb.iter().zip(alpha) {
            dalpha.push(dot(dpi, cache.h.row(j)));
            axpy(aij, dpi, dh.row_mut(j));
        }
        let de = softmax_backward(alpha, &dalpha);
        for ((&(j, sij), &zij), dei) in nb.iter().zip(&cache.z[i]).zip(de) {
            let dz = dei * leaky_relu_grad(zij, slope) * sij;
            ds[i] += dz;
            ds[j] += dz;
        }
    }
    for (i, &dsi) in ds.iter().enumerate() {
        if dsi != 0.0 {
            axpy(dsi, a.data(), dh.row_mut(i));
            axpy(dsi, cache.h.row(i), da.data_mut());
        }
    }
    dw.add_assign(&cache.input.t_matmul(&dh)?)?;
    if need_input_grad {
        Ok(Some(dh.matmul_t(w)?))
    } else {
        Ok(None)
    }
}

/// Everything the backward pass needs from a forward run.
#[derive(Debug, Clone)]
pub struct EgatTrace {
    neighborhoods: Vec<Vec<(usize, f64)>>,
    layers: Vec<LayerCache>,
    /// Dropout mask applied to each non-final layer's output.
    masks: Vec<Option<Tensor>>,
    output: Tensor,
}

impl EgatTrace {
    /// Final node matrix.
    pub fn output(&self) -> &Tensor {
        &self.output
    }

    pub fn layers(&self) -> &[LayerCache] {
        &self.layers
    }
}

/// A stack of edge-aware attention layers with named parameters
/// `{prefix}.layer{l}.w` (`in × out`) and `{prefix}.layer{l}.a` (`out`).
#[derive(Debug, Clone, PartialEq)]
pub struct Egat {
    prefix: String,
    config: EgatConfig,
}

impl Egat {
    pub fn new(prefix: &str, config: EgatConfig) -> Result<Egat> {
        if config.dims.len() < 2 || config.dims.contains(&0) {
            return Err(domain(format!("E-GAT widths {:?} need an input and ≥ 1 positive layer width", config.dims)));
        }
        if !(0.0..1.0).contains(&config.dropout) {
            return Err(domain(format!("dropout rate {} outside [0, 1)", config.dropout)));
        }
        Ok(Egat {
            prefix: prefix.into(),
            config,
        })
    }

    pub fn config(&self) -> &EgatConfig {
        &self.config
    }

    pub fn layer_count(&self) -> usize {
        self.config.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.config.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.config.dims.last().expect("validated non-empty")
    }

    pub fn weight_name(&self, layer: usize) -> String {
        format!("{}.layer{layer}.w", self.prefix)
    }

    pub fn attention_name(&self, layer: usize) -> String {
        format!("{}.layer{layer}.a", self.prefix)
    }

    pub fn param_names(&self) -> Vec<String> {
        (0..self.layer_count())
            .flat_map(|l| [self.weight_name(l), self.attention_name(l)])
            .collect()
    }

    /// Glorot-uniform weights and attention vectors.
    pub fn init(&self, store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
        for l in 0..self.layer_count() {
            let (i, o) = (self.config.dims[l], self.config.dims[l + 1]);
            store.insert(&self.weight_name(l), glorot_uniform(&[i, o], i, o, rng))?;
            store.insert(&self.attention_name(l), glorot_uniform(&[o], o, 1, rng))?;
        }
        Ok(())
    }

    pub fn forward(&self, store: &ParamStore, graph: &WeightedCodeGraph, mode: &mut Mode) -> Result<EgatTrace> {
        self.forward_features(store, graph, &graph.features, mode)
    }

    /// Runs the stack on explicit node features `x` over `graph`'s edges.
    pub fn forward_features(
        &self,
        store: &ParamStore,
        graph: &WeightedCodeGraph,
        x: &Tensor,
        mode: &mut Mode,
    ) -> Result<EgatTrace> {
        if graph.node_count() == 0 {
            return Err(domain("graph has no nodes"));
        }
        let neighborhoods = graph.neighborhoods();
        let mut layers = Vec::with_capacity(self.layer_count());
        let mut masks = Vec::with_capacity(self.layer_count());
        let mut current = x.clone();
        for l in 0..self.layer_count() {
            let w = store.value(&self.weight_name(l))?;
            let a = store.value(&self.attention_name(l))?;
            let cache = egat_layer_forward(&neighborhoods, &current, w, a, self.config.slope)
                .map_err(|e| dimension(format!("E-GAT layer {l}: {e}")))?;
            current = cache.out.clone();
            let mask = if l + 1 < self.layer_count() {
                mode.mask(current.shape(), self.config.dropout)?
            } else {
                None
            };
            if let Some(m) = &mask {
                for (v, k) in current.data_mut().iter_mut().zip(m.data()) {
                    *v *= k;
                }
            }
            layers.push(cache);
            masks.push(mask);
        }
        Ok(EgatTrace {
            neighborhoods,
            layers,
            masks,
            output: current,
        })
    }

    /// Accumulates parameter gradients for upstream gradient `d_out` on the
    /// final node matrix.
    pub fn backward(&self, store: &ParamStore, trace: &EgatTrace, d_out: &Tensor, grads: &mut Grads) -> Result<()> {
        if d_out.shape() != trace.output.shape() {
            return Err(dimension(format!(
                "E-GAT output gradient {:?} vs output {:?}",
                d_out.shape(),
                trace.output.shape()
            )));
        }
        let mut d = d_out.clone();
        for l in (0..self.layer_count()).rev() {
            if let Some(m) = &trace.masks[l] {
                for (g, k) in d.data_mut().iter_mut().zip(m.data()) {
                    *g *= k;
                }
            }
            let wn = self.weight_name(l);
            let an = self.attention_name(l);
            let w = store.value(&wn)?;
            let a = store.value(&an)?;
            let mut dw = core::mem::replace(grads.entry(store, &wn)?, Tensor::zeros(&[0]));
            let mut da = core::mem::replace(grads.entry(store, &an)?, Tensor::zeros(&[0]));
            let dx = egat_layer_backward(
                &trace.neighborhoods,
                &trace.layers[l],
                w,
                a,
                self.config.slope,
                &d,
                &mut dw,
                &mut da,
                l > 0,
            )?;
            *grads.entry(store, &wn)? = dw;
            *grads.entry(store, &an)? = da;
            if let Some(dx) = dx {
                d = dx;
            }
        }
        Ok(())
    }
}

/// Mean over node rows.
pub fn graph_readout(x: &Tensor) -> Result<Vec<f64>> {
    if x.shape().len() != 2 || x.rows() == 0 {
        return Err(domain("readout of an empty graph"));
    }
    let n = x.rows() as f64;
    let mut out = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        axpy(1.0, x.row(i), &mut out);
    }
    out.iter_mut().for_each(|v| *v /= n);
    Ok(out)
}

/// Gradient of [`graph_readout`] with respect to its `rows × d` input.
pub fn graph_readout_backward(d: &[f64], rows: usize) -> Tensor {
    let mut out = Tensor::zeros(&[rows, d.len()]);
    let scale = 1.0 / rows as f64;
    for i in 0..rows {
        axpy(scale, d, out.row_mut(i));
    }
    out
}
