//! Finite-difference harness shared by the layer tests.

use crate::error::Result;
use crate::nn::{Grads, ParamStore, Tensor};

pub use crate::nn::random_tensor as random;

pub fn check_layer<C>(
    store: &ParamStore,
    seed: u64,
    input_shape: &[usize],
    forward: impl Fn(&ParamStore, &Tensor) -> Result<(Tensor, C)>,
    backward: impl Fn(&ParamStore, &C, &Tensor, &mut Grads) -> Result<Tensor>,
) -> f64 {
    crate::nn::check_layer(store, seed, input_shape, forward, backward).unwrap()
}
