use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodePooling {
    #[default]
    Mean,
    Max,
}

#[derive(Debug, Clone)]
pub struct PoolCache {
    n_nodes: usize,
    /// Row chosen for each output entry under max pooling.
    argmax: Option<Vec<usize>>,
}

/// Pools each sample's `N` node rows of `[B*N, F]` into one `[B, F]` row.
pub fn pool_nodes(h: &Tensor, n_nodes: usize, mode: NodePooling) -> Result<(Tensor, PoolCache)> {
    if n_nodes == 0 || h.rows() % n_nodes != 0 {
        return Err(Error::shape("pool_nodes", h.shape(), &[n_nodes]));
    }
    let (b, f) = (h.rows() / n_nodes, h.cols());
    let mut out = vec![0.0; b * f];
    let mut argmax = Vec::new();
    for s in 0..b {
        let orow = &mut out[s * f..(s + 1) * f];
        match mode {
            NodePooling::Mean => {
                for n in 0..n_nodes {
                    for (o, v) in orow.iter_mut().zip(h.row(s * n_nodes + n)) {
                        *o += v;
                    }
                }
                orow.iter_mut().for_each(|o| *o /= n_nodes as f64);
            }
            NodePooling::Max => {
                for (j, o) in orow.iter_mut().enumerate() {
                    let best = (0..n_nodes)
                        .map(|n| s * n_nodes + n)
                        .fold(s * n_nodes, |a, r| if h.at(r, j) > h.at(a, j) { r } else { a });
                    *o = h.at(best, j);
                    argmax.push(best);
                }
            }
        }
    }
    let cache = PoolCache {
        n_nodes,
        argmax: (mode == NodePooling::Max).then_some(argmax),
    };
    Ok((Tensor::new(&[b, f], out)?, cache))
}

pub fn pool_nodes_backward(cache: &PoolCache, dy: &Tensor) -> Result<Tensor> {
    let (b, f, n) = (dy.rows(), dy.cols(), cache.n_nodes);
    let mut dh = Tensor::zeros(&[b * n, f]);
    match &cache.argmax {
        None => {
            for s in 0..b {
                for r in 0..n {
                    for (d, g) in dh.data_mut()[(s * n + r) * f..(s * n + r + 1) * f].iter_mut().zip(dy.row(s)) {
                        *d = g / n as f64;
                    }
                }
            }
        }
        Some(argmax) => {
            for (i, (&row, &g)) in argmax.iter().zip(dy.data()).enumerate() {
                dh.data_mut()[row * f + i % f] += g;
            }
        }
    }
    Ok(dh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::testing::random;
    use crate::nn::grad_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_node_and_identical_nodes() {
        let v = Tensor::new(&[1, 3], vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(pool_nodes(&v, 1, NodePooling::Mean).unwrap().0, v);
        let same = Tensor::new(&[3, 3], [v.data(); 3].concat()).unwrap();
        for mode in [NodePooling::Mean, NodePooling::Max] {
            assert_eq!(pool_nodes(&same, 3, mode).unwrap().0, v);
        }
    }

    #[test]
    fn node_order_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = random(&[5, 4], &mut rng);
        let rev = Tensor::new(&[5, 4], (0..5).rev().flat_map(|r| h.row(r).to_vec()).collect()).unwrap();
        for mode in [NodePooling::Mean, NodePooling::Max] {
            let a = pool_nodes(&h, 5, mode).unwrap().0;
            let b = pool_nodes(&rev, 5, mode).unwrap().0;
            assert!(a.max_abs_diff(&b) < 1e-15);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random(&[6, 4], &mut rng);
            let w = random(&[2, 4], &mut rng);
            for mode in [NodePooling::Mean, NodePooling::Max] {
                let e = grad_check(
                    |v| {
                        let h = Tensor::new(&[6, 4], v.to_vec())?;
                        let (y, cache) = pool_nodes(&h, 3, mode)?;
                        let value = y.data().iter().zip(w.data()).map(|(a, b)| a * b).sum();
                        Ok((value, pool_nodes_backward(&cache, &w)?.into_data()))
                    },
                    h.data(),
                    1e-6,
                )
                .unwrap();
                assert!(e < 1e-6, "{mode:?} seed {seed}: {e}");
            }
        }
    }
}
