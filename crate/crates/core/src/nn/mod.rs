//! Dense numeric primitives shared by the encoders and the classifier.
//!
//! There is no autodiff graph: each layer owns an explicit backward pass that
//! writes into a [`Grads`] buffer, and [`finite_diff_grad`] is the oracle the
//! tests hold those passes against.

mod dropout;
mod gradcheck;
mod init;
mod ops;
mod optim;
mod params;
mod tensor;

pub use dropout::{dropout_mask, Mode, Rng};
pub use gradcheck::{finite_diff_grad, max_relative_error, RELATIVE_ERROR_FLOOR};
pub use init::glorot_uniform;
pub use ops::{
    cross_entropy, elu, elu_grad, leaky_relu, leaky_relu_grad, log_softmax_grad_from_probs, sigmoid,
    softmax, softmax_backward,
};
pub use optim::{adam_step, cosine_lr, AdamConfig};
pub use params::{Grads, Param, ParamStore};
pub use tensor::Tensor;
pub(crate) use tensor::{axpy, dot, matvec, matvec_t_acc, outer_acc};
