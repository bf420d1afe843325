//! Dual-view smart contract vulnerability detection.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithmic stage
//! of the pipeline:
//!
//! * [`evm`]: bytecode decoding against a pinned Shanghai opcode table.
//! * [`cfg`]: basic blocks, jump resolution, dead-block pruning and
//!   depth-first control-flow path extraction.
//! * [`ast`]: syntax-tree field filtering, four-tier node importance and the
//!   importance-weighted contract graph.
//! * [`embed`]: hashed token embeddings for graph nodes and the trainable
//!   opcode table for sequences.
//! * [`nn`]: tensors, parameters with gradient slots, Adam, cosine annealing,
//!   dropout and a finite-difference gradient oracle.
//! * [`egat`] and [`hyperagru`]: the source-view and bytecode-view encoders.
//! * [`model`]: fusion classifier, training loop, folds and metrics.
//!
//! File formats, checkpoints and the command line live in the `dvdet` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ast;
pub mod cfg;
pub mod egat;
pub mod embed;
mod error;
pub mod evm;
pub mod hyperagru;
pub mod model;
pub mod nn;

pub use error::{Error, Result};
