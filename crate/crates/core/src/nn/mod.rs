//! Minimal dense network core: matrices, layers, inverted dropout, MSE, reverse-mode
//! gradients, Adam and a mini-batch training loop.

pub mod adam;
pub mod dropout;
pub mod layer;
pub mod loss;
pub mod matrix;
pub mod network;
pub mod persist;
pub mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dropout::dropout_apply;
pub use layer::{sigmoid, Activation, DenseLayer, LayerGrad};
pub use loss::{mse_grad, mse_loss};
pub use matrix::Matrix;
pub use network::{ForwardTrace, Gradients, Mlp};
pub use persist::{load_mlp, save_mlp, NN_FORMAT_VERSION};
pub use train::{train, CorruptionHook, FitConfig, Trainable};
