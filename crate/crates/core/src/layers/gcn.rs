use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{normalized_propagation, AdjacencyMatrix};
use crate::nn::ops::{matmul, matmul_backward};
use crate::nn::{glorot_uniform, Activation, Grads, ParamId, ParamStore, Tensor};

/// Graph convolution `act(P H W)` applied to each sample's `N x F` block of
/// a `[B*N, F]` node-feature matrix.
#[derive(Debug, Clone)]
pub struct Gcn {
    pub w: ParamId,
    pub activation: Activation,
    /// Normalized propagation matrix `N x N`.
    pub propagation: Tensor,
}

#[derive(Debug, Clone)]
pub struct GcnCache {
    h: Tensor,
    z: Tensor,
    y: Tensor,
}

pub fn propagation_tensor(adjacency: &AdjacencyMatrix) -> Result<Tensor> {
    let p = normalized_propagation(adjacency)?;
    let n = p.dim();
    Tensor::new(&[n, n], p.as_slice().to_vec())
}

/// `P X_s` for every `N`-row block `X_s` of `x`.
fn propagate(p: &Tensor, x: &Tensor, transpose: bool) -> Result<Tensor> {
    let n = p.rows();
    let f = x.cols();
    if n == 0 || x.rows() % n != 0 {
        return Err(Error::shape("gcn propagate", p.shape(), x.shape()));
    }
    let (pd, xd) = (p.data(), x.data());
    let mut out = vec![0.0; x.len()];
    for (ob, xb) in out.chunks_exact_mut(n * f).zip(xd.chunks_exact(n * f)) {
        for i in 0..n {
            let orow = &mut ob[i * f..(i + 1) * f];
            for j in 0..n {
                let pij = if transpose { pd[j * n + i] } else { pd[i * n + j] };
                if pij == 0.0 {
                    continue;
                }
                for (o, &v) in orow.iter_mut().zip(&xb[j * f..(j + 1) * f]) {
                    *o += pij * v;
                }
            }
        }
    }
    Tensor::new(&[x.rows(), f], out)
}

impl Gcn {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        inputs: usize,
        outputs: usize,
        activation: Activation,
        propagation: Tensor,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let w = store.add(format!("{name}.W"), glorot_uniform(&[inputs, outputs], inputs, outputs, rng))?;
        Ok(Self {
            w,
            activation,
            propagation,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.propagation.rows()
    }

    pub fn forward(&self, store: &ParamStore, h: &Tensor) -> Result<(Tensor, GcnCache)> {
        let w = store.value(self.w);
        if h.cols() != w.rows() {
            return Err(Error::shape("gcn_forward", h.shape(), w.shape()));
        }
        // P (H W): the node mixing acts on the narrower output width.
        let z = propagate(&self.propagation, &matmul(h, w)?, false)?;
        let y = self.activation.forward(&z);
        Ok((
            y.clone(),
            GcnCache {
                h: h.clone(),
                z,
                y,
            },
        ))
    }

    pub fn backward(&self, store: &ParamStore, cache: &GcnCache, dy: &Tensor, grads: &mut Grads) -> Result<Tensor> {
        let dz = self.activation.backward(&cache.z, &cache.y, dy)?;
        let dhw = propagate(&self.propagation, &dz, true)?;
        let (dh, dw) = matmul_backward(&cache.h, store.value(self.w), &dhw)?;
        grads.accumulate(self.w, &dw)?;
        Ok(dh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{AdjacencyMode, SquareMatrix};
    use crate::layers::testing::{check_layer, random};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn adjacency(rows: &[Vec<f64>]) -> AdjacencyMatrix {
        AdjacencyMatrix::from_matrix(SquareMatrix::from_rows(rows).unwrap(), AdjacencyMode::Binary).unwrap()
    }

    fn identity_layer(p: Tensor, width: usize) -> (ParamStore, Gcn) {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = Gcn::new(&mut store, "g", width, width, Activation::Identity, p, &mut rng).unwrap();
        let mut eye = Tensor::zeros(&[width, width]);
        for i in 0..width {
            eye.data_mut()[i * width + i] = 1.0;
        }
        store.get_mut(g.w).value = eye;
        (store, g)
    }

    #[test]
    fn single_node_identity() {
        let p = propagation_tensor(&adjacency(&[vec![0.0]])).unwrap();
        let (store, g) = identity_layer(p, 3);
        let h = Tensor::new(&[1, 3], vec![0.3, -1.0, 2.0]).unwrap();
        assert_eq!(g.forward(&store, &h).unwrap().0, h);
    }

    #[test]
    fn two_node_oracle() {
        let p = propagation_tensor(&adjacency(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        let (store, g) = identity_layer(p, 2);
        let h = Tensor::new(&[2, 2], vec![2.0, 0.0, 0.0, 2.0]).unwrap();
        let (y, _) = g.forward(&store, &h).unwrap();
        assert_eq!(y.data(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let p = propagation_tensor(&adjacency(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        let (store, g) = identity_layer(p, 2);
        assert!(matches!(g.forward(&store, &Tensor::zeros(&[2, 3])), Err(Error::Shape { .. })));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let path = adjacency(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]);
        for seed in 0..10 {
            for act in [Activation::Identity, Activation::Relu] {
                let mut store = ParamStore::new();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = Gcn::new(&mut store, "g", 4, 3, act, propagation_tensor(&path).unwrap(), &mut rng).unwrap();
                // two samples of three nodes
                let err = check_layer(&store, seed, &[6, 4], |s, x| g.forward(s, x), |s, c, dy, gr| g.backward(s, c, dy, gr));
                assert!(err < 1e-6, "seed {seed}: {err}");
            }
        }
    }

    #[test]
    fn permutation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = adjacency(&[
            vec![0.0, 1.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0, 0.0],
        ]);
        let perm = [2, 0, 3, 1];
        let mut store = ParamStore::new();
        let g = Gcn::new(&mut store, "g", 5, 3, Activation::Relu, propagation_tensor(&a).unwrap(), &mut rng).unwrap();
        let gp = Gcn {
            propagation: propagation_tensor(&a.permuted(&perm)).unwrap(),
            ..g.clone()
        };
        let h = random(&[4, 5], &mut rng);
        let mut hp = Tensor::zeros(&[4, 5]);
        for i in 0..4 {
            hp.data_mut()[perm[i] * 5..perm[i] * 5 + 5].copy_from_slice(h.row(i));
        }
        let (y, _) = g.forward(&store, &h).unwrap();
        let (yp, _) = gp.forward(&store, &hp).unwrap();
        for i in 0..4 {
            for (a, b) in y.row(i).iter().zip(yp.row(perm[i])) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
