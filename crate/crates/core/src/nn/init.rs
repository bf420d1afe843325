use super::{Rng, Tensor};

/// Glorot/Xavier uniform: `U(−b, b)` with `b = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut Rng) -> Tensor {
    let bound = libm::sqrt(6.0 / (fan_in + fan_out).max(1) as f64);
    let mut t = Tensor::zeros(shape);
    for x in t.data_mut() {
        *x = rng.uniform_in(-bound, bound);
    }
    t
}
