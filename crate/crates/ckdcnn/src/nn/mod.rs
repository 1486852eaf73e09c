//! Neural-network building blocks: layers with analytic backward passes,
//! the softmax cross-entropy loss, Adam, the fixed architecture, the
//! training loop, and the finite-difference gradient oracle.

mod adam;
mod gradcheck;
pub mod layers;
mod loss;
pub mod model;
mod train;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use gradcheck::{finite_diff_grad, max_relative_error};
pub use layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool2x2_backward,
    maxpool2x2_forward, relu, relu_backward, softmax, ConvLayer, ConvGrads, DenseGrads,
    DenseLayer, PoolArgmax,
};
pub use loss::{sparse_ce_loss, PROB_FLOOR};
pub use model::{build_paper_model, ForwardTrace, Model, ParamGrads};
pub use train::{evaluate, fit, TrainConfig, TrainHistory};
