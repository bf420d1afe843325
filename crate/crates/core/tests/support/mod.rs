//! Independent reference implementations shared by integration tests.
//!
//! Everything here is deliberately written the slow, obvious way so that it
//! can serve as an oracle for the optimized library code.

#![allow(dead_code)]

use dvdet_core::nn::{Rng, Tensor};

pub fn random_tensor(shape: &[usize], rng: &mut Rng, scale: f64) -> Tensor {
    let mut t = Tensor::zeros(shape);
    for v in t.data_mut() {
        *v = rng.uniform_in(-scale, scale);
    }
    t
}

pub fn random_vec(n: usize, rng: &mut Rng, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.uniform_in(-scale, scale)).collect()
}

/// A random DAG over blocks `0..n` laid out as real bytecode.
///
/// Every edge goes from a lower to a higher block index. A block with two
/// successors ends in `JUMPI` and falls through to the next block; a block
/// with one successor ends in `JUMP`; a block without successors ends in
/// `STOP`. Every block except the first starts with `JUMPDEST`.
pub struct DagProgram {
    pub code: Vec<u8>,
    pub successors: Vec<Vec<usize>>,
    pub offsets: Vec<usize>,
}

pub fn random_dag_program(rng: &mut Rng, max_blocks: usize) -> DagProgram {
    let n = 1 + rng.below(max_blocks);
    let mut successors = vec![Vec::new(); n];
    for i in 0..n {
        let remaining = n - i - 1;
        let degree = match remaining {
            0 => 0,
            1 => rng.below(2),
            _ => rng.below(3),
        };
        successors[i] = match degree {
            0 => vec![],
            1 => vec![i + 1 + rng.below(remaining)],
            _ => vec![i + 1, i + 2 + rng.below(remaining - 1)],
        };
    }
    // Each block: [JUMPDEST] + optional filler + terminator sequence.
    let fillers: Vec<usize> = (0..n).map(|_| rng.below(3)).collect();
    let block_len = |i: usize| -> usize {
        let head = usize::from(i > 0);
        let tail = match successors[i].len() {
            0 => 1,
            _ => 4, // PUSH2 hi lo + JUMP/JUMPI
        };
        head + fillers[i] + tail
    };
    let mut offsets = Vec::with_capacity(n);
    let mut at = 0;
    for i in 0..n {
        offsets.push(at);
        at += block_len(i);
    }
    let mut code = Vec::with_capacity(at);
    for i in 0..n {
        if i > 0 {
            code.push(0x5B);
        }
        for _ in 0..fillers[i] {
            code.push(0x01); // ADD
        }
        match successors[i].as_slice() {
            [] => code.push(0x00),
            [t] => {
                code.push(0x61);
                code.extend_from_slice(&(offsets[*t] as u16).to_be_bytes());
                code.push(0x56);
            }
            [_, t] => {
                code.push(0x61);
                code.extend_from_slice(&(offsets[*t] as u16).to_be_bytes());
                code.push(0x57);
            }
            _ => unreachable!(),
        }
    }
    DagProgram {
        code,
        successors,
        offsets,
    }
}

/// Every maximal path from `from` in a DAG, by plain recursion.
pub fn all_paths(successors: &[Vec<usize>], from: usize) -> Vec<Vec<usize>> {
    if successors[from].is_empty() {
        return vec![vec![from]];
    }
    let mut out = Vec::new();
    for &s in &successors[from] {
        for mut tail in all_paths(successors, s) {
            tail.insert(0, from);
            out.push(tail);
        }
    }
    out
}

fn lrelu(v: f64, slope: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        slope * v
    }
}

fn elu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        v.exp() - 1.0
    }
}

/// Textbook single-head GAT layer over an undirected edge list with self
/// loops: `e_ij = LeakyReLU(a_srcᵀ W x_i + a_dstᵀ W x_j)`, softmax over the
/// closed neighbourhood, ELU of the attention-weighted sum.
pub fn reference_gat_layer(
    n: usize,
    edges: &[(usize, usize)],
    x: &[Vec<f64>],
    w: &[Vec<f64>],
    a_src: &[f64],
    a_dst: &[f64],
    slope: f64,
) -> Vec<Vec<f64>> {
    let in_dim = w.len();
    let out_dim = w[0].len();
    let h: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..out_dim)
                .map(|o| (0..in_dim).map(|k| x[i][k] * w[k][o]).sum())
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut hood: Vec<usize> = edges
            .iter()
            .filter_map(|&(u, v)| {
                if u == i {
                    Some(v)
                } else if v == i {
                    Some(u)
                } else {
                    None
                }
            })
            .collect();
        hood.push(i);
        let score = |j: usize| {
            let s: f64 = (0..out_dim).map(|o| a_src[o] * h[i][o] + a_dst[o] * h[j][o]).sum();
            lrelu(s, slope)
        };
        let exps: Vec<f64> = hood.iter().map(|&j| score(j).exp()).collect();
        let z: f64 = exps.iter().sum();
        let row = (0..out_dim)
            .map(|o| {
                let acc: f64 = hood.iter().zip(&exps).map(|(&j, e)| e / z * h[j][o]).sum();
                elu(acc)
            })
            .collect();
        out.push(row);
    }
    out
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// One GRU step written out gate by gate from the gate formulas; `w_*`
/// are `hidden × (hidden + input)` and act on `[h_prev, x]`.
#[allow(clippy::too_many_arguments)]
pub fn reference_gru_step(
    x: &[f64],
    h_prev: &[f64],
    w_z: &[Vec<f64>],
    w_r: &[Vec<f64>],
    w_h: &[Vec<f64>],
    b_z: &[f64],
    b_r: &[f64],
    b_h: &[f64],
) -> Vec<f64> {
    let hidden = h_prev.len();
    let concat: Vec<f64> = h_prev.iter().chain(x).copied().collect();
    let lin = |w: &[Vec<f64>], b: &[f64], v: &[f64], k: usize| -> f64 {
        let mut s = b[k];
        for (c, vc) in v.iter().enumerate() {
            s += w[k][c] * vc;
        }
        s
    };
    let z: Vec<f64> = (0..hidden).map(|k| sigmoid(lin(w_z, b_z, &concat, k))).collect();
    let r: Vec<f64> = (0..hidden).map(|k| sigmoid(lin(w_r, b_r, &concat, k))).collect();
    let gated: Vec<f64> = (0..hidden)
        .map(|k| r[k] * h_prev[k])
        .chain(x.iter().copied())
        .collect();
    (0..hidden)
        .map(|k| {
            let cand = lin(w_h, b_h, &gated, k).tanh();
            (1.0 - z[k]) * h_prev[k] + z[k] * cand
        })
        .collect()
}

pub fn rows(t: &Tensor) -> Vec<Vec<f64>> {
    (0..t.rows()).map(|i| t.row(i).to_vec()).collect()
}
