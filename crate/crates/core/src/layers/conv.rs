use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::ops::{add_bias, add_bias_backward, matmul, matmul_nt, matmul_tn, relu, relu_backward};
use crate::nn::{glorot_uniform, Grads, ParamId, ParamStore, Tensor};

/// Valid 1-D cross-correlation with bias, relu, then non-overlapping max
/// pooling. Inputs are time-major: `[B*L, C_in]` rows, one per (sample, step);
/// outputs are `[B*L_out, C_out]` with `L_out = (L - k + 1) / pool`.
#[derive(Debug, Clone)]
pub struct Conv1dPool {
    /// `[C_out, C_in * k]`, input channel major, kernel tap minor.
    pub w: ParamId,
    pub b: ParamId,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub pool: usize,
    /// Sequence length L of the input.
    pub length: usize,
}

#[derive(Debug, Clone)]
pub struct ConvCache {
    batch: usize,
    cols: Tensor,
    pre: Tensor,
    /// Flat index into the activated conv output for each pooled entry.
    argmax: Vec<usize>,
}

impl Conv1dPool {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        pool: usize,
        length: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if kernel == 0 || kernel > length {
            return Err(Error::InvalidArgument(format!("kernel {kernel} does not fit length {length}")));
        }
        if pool == 0 || pool > length - kernel + 1 {
            return Err(Error::InvalidArgument(format!(
                "pool width {pool} exceeds feature length {}",
                length - kernel + 1
            )));
        }
        let fan_in = in_channels * kernel;
        let w = store.add(
            format!("{name}.W"),
            glorot_uniform(&[out_channels, fan_in], fan_in, out_channels * kernel, rng),
        )?;
        let b = store.add(format!("{name}.b"), Tensor::zeros(&[out_channels]))?;
        Ok(Self {
            w,
            b,
            in_channels,
            out_channels,
            kernel,
            pool,
            length,
        })
    }

    pub fn conv_length(&self) -> usize {
        self.length - self.kernel + 1
    }

    pub fn out_length(&self) -> usize {
        self.conv_length() / self.pool
    }

    pub fn forward(&self, store: &ParamStore, x: &Tensor) -> Result<(Tensor, ConvCache)> {
        let (l, c, k) = (self.length, self.in_channels, self.kernel);
        if x.cols() != c || x.rows() % l != 0 {
            return Err(Error::shape("conv1d_pool_forward", x.shape(), &[l, c]));
        }
        let batch = x.rows() / l;
        let lc = self.conv_length();
        let mut cols = Vec::with_capacity(batch * lc * c * k);
        for s in 0..batch {
            for t in 0..lc {
                for ch in 0..c {
                    for j in 0..k {
                        cols.push(x.at(s * l + t + j, ch));
                    }
                }
            }
        }
        let cols = Tensor::new(&[batch * lc, c * k], cols)?;
        let pre = add_bias(&matmul_nt(&cols, store.value(self.w))?, store.value(self.b))?;
        let act = relu(&pre);

        let (lo, co, p) = (self.out_length(), self.out_channels, self.pool);
        let mut out = Vec::with_capacity(batch * lo * co);
        let mut argmax = Vec::with_capacity(batch * lo * co);
        for s in 0..batch {
            for q in 0..lo {
                for o in 0..co {
                    let mut best = (s * lc + q * p) * co + o;
                    for t in q * p + 1..(q + 1) * p {
                        let idx = (s * lc + t) * co + o;
                        if act.data()[idx] > act.data()[best] {
                            best = idx;
                        }
                    }
                    out.push(act.data()[best]);
                    argmax.push(best);
                }
            }
        }
        let cache = ConvCache {
            batch,
            cols,
            pre,
            argmax,
        };
        Ok((Tensor::new(&[batch * lo, co], out)?, cache))
    }

    pub fn backward(&self, store: &ParamStore, cache: &ConvCache, dy: &Tensor, grads: &mut Grads) -> Result<Tensor> {
        if dy.len() != cache.argmax.len() {
            return Err(Error::shape("conv1d_pool_backward", dy.shape(), &[cache.argmax.len()]));
        }
        let mut dact = Tensor::zeros(cache.pre.shape());
        for (&idx, &g) in cache.argmax.iter().zip(dy.data()) {
            dact.data_mut()[idx] += g;
        }
        let dpre = relu_backward(&cache.pre, &dact)?;
        grads.accumulate(self.w, &matmul_tn(&dpre, &cache.cols)?)?;
        grads.accumulate(self.b, &add_bias_backward(&dpre).1)?;
        let dcols = matmul(&dpre, store.value(self.w))?;

        let (l, c, k, lc) = (self.length, self.in_channels, self.kernel, self.conv_length());
        let mut dx = Tensor::zeros(&[cache.batch * l, c]);
        for s in 0..cache.batch {
            for t in 0..lc {
                let row = dcols.row(s * lc + t);
                for ch in 0..c {
                    for j in 0..k {
                        dx.data_mut()[(s * l + t + j) * c + ch] += row[ch * k + j];
                    }
                }
            }
        }
        Ok(dx)
    }
}
