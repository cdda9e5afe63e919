//! A small f64 tensor engine: dense tensors, named parameters with gradient
//! buffers, primitive operations with explicit backward functions, finite
//! difference checking, dropout and parameter checkpoints.

mod checkpoint;
mod dropout;
mod gradcheck;
pub mod ops;
mod param;
mod tensor;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointEntry, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use dropout::{dropout, dropout_backward, glorot_uniform};
pub use gradcheck::{check_layer, grad_check, random_tensor, relative_error};
pub use ops::Activation;
pub use param::{Grads, ParamId, ParamStore, Parameter};
pub use tensor::Tensor;
