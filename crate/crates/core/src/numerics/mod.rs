//! Dense kernels, layers, optimizer, random streams and gradient checking.

pub mod adamw;
pub mod gradcheck;
pub mod layers;
mod real;
pub mod rng;
pub mod tensor;

pub use adamw::{adamw_step, AdamW, AdamWConfig};
pub use gradcheck::{grad_check, numerical_gradient};
pub use layers::{
    dropout, gelu, gelu_grad, layer_norm_backward, layer_norm_forward, linear_backward,
    linear_forward, softmax, softmax_backward, DropoutMask, LayerNormCache, LinearGrads, Mode,
    LAYER_NORM_EPS,
};
pub use real::Real;
pub use rng::{Rng, StreamKey};
pub use tensor::Tensor2D;
