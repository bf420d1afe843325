use rand_core::{RngCore, SeedableRng};

use super::Tensor;
use crate::error::domain;
use crate::Result;

/// Counter-based generator used for initialization and dropout.
///
/// Streams let independent consumers (per sample, per step) draw from the
/// same seed without sharing state, so results do not depend on scheduling.
#[derive(Debug, Clone)]
pub struct Rng(rand_chacha::ChaCha20Rng);

impl Rng {
    pub fn new(seed: u64, stream: u64) -> Rng {
        let mut inner = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng(inner)
    }

    pub fn from_seed_bytes(seed: [u8; 32]) -> Rng {
        Rng(rand_chacha::ChaCha20Rng::from_seed(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n` (n > 0).
    pub fn below(&mut self, n: usize) -> usize {
        // Rejection sampling keeps the draw unbiased.
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Forward-pass mode. Training carries the generator that drives dropout.
pub enum Mode<'a> {
    Eval,
    Train(&'a mut Rng),
}

impl Mode<'_> {
    pub fn is_training(&self) -> bool {
        matches!(self, Mode::Train(_))
    }

    /// Dropout mask for training, `None` in evaluation or at rate 0.
    pub fn mask(&mut self, shape: &[usize], rate: f64) -> Result<Option<Tensor>> {
        match self {
            Mode::Train(rng) if rate != 0.0 => dropout_mask(shape, rate, rng, true).map(Some),
            _ => {
                if !(0.0..1.0).contains(&rate) {
                    return Err(domain(alloc::format!("dropout rate {rate} outside [0, 1)")));
                }
                Ok(None)
            }
        }
    }
}

/// Inverted-dropout keep mask: kept entries are `1 / (1 − rate)`, dropped
/// entries are 0. Evaluation mode (`training == false`) returns all ones.
pub fn dropout_mask(shape: &[usize], rate: f64, rng: &mut Rng, training: bool) -> Result<Tensor> {
    if !(0.0..1.0).contains(&rate) {
        return Err(domain(alloc::format!("dropout rate {rate} outside [0, 1)")));
    }
    let mut mask = Tensor::zeros(shape);
    if !training || rate == 0.0 {
        mask.fill(1.0);
        return Ok(mask);
    }
    let keep = 1.0 / (1.0 - rate);
    for m in mask.data_mut() {
        *m = if rng.uniform() >= rate { keep } else { 0.0 };
    }
    Ok(mask)
}
