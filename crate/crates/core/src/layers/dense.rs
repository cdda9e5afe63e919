use rand::Rng;

use crate::error::Result;
use crate::nn::ops::{add_bias, add_bias_backward, matmul, matmul_backward};
use crate::nn::{glorot_uniform, Activation, Grads, ParamId, ParamStore, Tensor};

/// `act(x W + b)` with `W [in, out]`.
#[derive(Debug, Clone)]
pub struct Dense {
    pub w: ParamId,
    pub b: ParamId,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    x: Tensor,
    z: Tensor,
    y: Tensor,
}

impl Dense {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let w = store.add(format!("{name}.W"), glorot_uniform(&[inputs, outputs], inputs, outputs, rng))?;
        let b = store.add(format!("{name}.b"), Tensor::zeros(&[outputs]))?;
        Ok(Self { w, b, activation })
    }

    pub fn outputs(&self, store: &ParamStore) -> usize {
        store.value(self.w).cols()
    }

    pub fn forward(&self, store: &ParamStore, x: &Tensor) -> Result<(Tensor, DenseCache)> {
        let z = add_bias(&matmul(x, store.value(self.w))?, store.value(self.b))?;
        let y = self.activation.forward(&z);
        let cache = DenseCache {
            x: x.clone(),
            z,
            y: y.clone(),
        };
        Ok((y, cache))
    }

    pub fn backward(&self, store: &ParamStore, cache: &DenseCache, dy: &Tensor, grads: &mut Grads) -> Result<Tensor> {
        let dz = self.activation.backward(&cache.z, &cache.y, dy)?;
        let (_, db) = add_bias_backward(&dz);
        let (dx, dw) = matmul_backward(&cache.x, store.value(self.w), &dz)?;
        grads.accumulate(self.w, &dw)?;
        grads.accumulate(self.b, &db)?;
        Ok(dx)
    }
}
