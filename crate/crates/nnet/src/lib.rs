//! Minimal CPU tensor and backpropagation engine.
//!
//! Layers implement explicit forward/backward passes over row-major NCHW
//! tensors; convolutions are lowered to GEMM through im2col. Everything is
//! generic over [`Scalar`] so the same code trains in `f32` and is gradient
//! checked in `f64`.

pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod mlp;
pub mod module;
pub mod optim;
pub mod scalar;
pub mod tensor;
pub mod tgcnn;
pub mod train;

pub use error::{NnError, Result};
pub use layers::{Layer, Mode, Slot};
pub use mlp::Mlp;
pub use module::Module;
pub use optim::{Adam, AdamConfig, Optimizer, OptimizerConfig, Sgd, SgdConfig};
pub use scalar::Scalar;
pub use tensor::Tensor;
pub use tgcnn::{TgcnnConfig, TgcnnModel};
pub use train::{recalibrate_batchnorm, train_tgcnn, MapSample, TrainConfig, TrainReport};
