use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Tensor;
use crate::error::{Error, Result};

/// Inverted dropout. In training mode each entry is zeroed with probability
/// `rate` and survivors are scaled by `1/(1-rate)`; the returned mask holds
/// those per-entry factors. Outside training (or at rate 0) the input passes
/// through and no mask is returned.
pub fn dropout(x: &Tensor, rate: f64, training: bool, seed: u64) -> Result<(Tensor, Option<Tensor>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("dropout rate {rate} outside [0, 1)")));
    }
    if !training || rate == 0.0 {
        return Ok((x.clone(), None));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = 1.0 / (1.0 - rate);
    let factors = (0..x.len())
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
        .collect();
    let mask = Tensor::new(x.shape(), factors)?;
    let y = super::ops::hadamard(x, &mask)?;
    Ok((y, Some(mask)))
}

pub fn dropout_backward(dy: &Tensor, mask: Option<&Tensor>) -> Result<Tensor> {
    match mask {
        Some(m) => super::ops::hadamard(dy, m),
        None => Ok(dy.clone()),
    }
}

/// Glorot-uniform values in `+-sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out).max(1) as f64).sqrt();
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-limit..limit)).collect()).expect("shape product")
}
