//! A small recurrent network engine written directly against `f64` slices.
//!
//! Everything a model needs lives here: tensors, matmul kernels, GRU/LSTM/RNN
//! layers (optionally bidirectional), batch normalization, a dense sigmoid
//! head, losses, Adam, a training loop, JSON checkpoints, and a finite
//! difference gradient checker. No graph, no autograd: each layer carries its
//! own hand-derived backward pass, and the gradient checker keeps them honest.
//!
//! Activations between layers are time major, shape `(steps, batch, features)`.
//! Sequences carry one feature vector per trellis step, so "steps" is the
//! block length of the code being decoded.

pub mod batchnorm;
pub mod checkpoint;
pub mod dense;
pub mod gradcheck;
pub mod linalg;
pub mod loss;
pub mod model;
pub mod optim;
pub mod params;
pub mod recurrent;
pub mod tensor;
pub mod train;

pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint,
};
pub use gradcheck::gradcheck;
pub use loss::{loss_and_grad, LossKind};
pub use model::{
    backward, forward_infer, forward_train, init_params, predict_bits, CellKind, LayerSpec,
    ModelSpec,
};
pub use optim::{clip_global_norm, Adam};
pub use params::ParameterSet;
pub use tensor::Tensor;
pub use train::{evaluate_loss, train, Dataset, TrainConfig, TrainReport};

#[derive(Debug, thiserror::Error)]
pub enum NeuralError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NeuralError>;
