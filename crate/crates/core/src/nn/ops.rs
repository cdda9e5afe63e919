//! Primitive operations on row-major matrices (a tensor is read as
//! `rows x cols`, trailing axes flattened). Each forward function has a
//! matching `*_backward` taking the upstream gradient.

use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(op, a.shape(), b.shape()));
    }
    Ok(())
}

/// `a [m,k] . b [k,n]`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    if b.rows() != k {
        return Err(Error::shape("matmul", a.shape(), b.shape()));
    }
    let (ad, bd) = (a.data(), b.data());
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let orow = &mut out[i * n..(i + 1) * n];
        for (p, &av) in ad[i * k..(i + 1) * k].iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            for (o, &bv) in orow.iter_mut().zip(&bd[p * n..(p + 1) * n]) {
                *o += av * bv;
            }
        }
    }
    Tensor::new(&[m, n], out)
}

/// `a [m,k] . b^T` with `b [n,k]`.
pub fn matmul_nt(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k, n) = (a.rows(), a.cols(), b.rows());
    if b.cols() != k {
        return Err(Error::shape("matmul_nt", a.shape(), b.shape()));
    }
    let (ad, bd) = (a.data(), b.data());
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m {
        let arow = &ad[i * k..(i + 1) * k];
        for j in 0..n {
            out.push(arow.iter().zip(&bd[j * k..(j + 1) * k]).map(|(x, y)| x * y).sum());
        }
    }
    Tensor::new(&[m, n], out)
}

/// `a^T . b` with `a [k,m]`, `b [k,n]`.
pub fn matmul_tn(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (k, m, n) = (a.rows(), a.cols(), b.cols());
    if b.rows() != k {
        return Err(Error::shape("matmul_tn", a.shape(), b.shape()));
    }
    let (ad, bd) = (a.data(), b.data());
    let mut out = vec![0.0; m * n];
    for p in 0..k {
        let brow = &bd[p * n..(p + 1) * n];
        for (i, &av) in ad[p * m..(p + 1) * m].iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            for (o, &bv) in out[i * n..(i + 1) * n].iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    Tensor::new(&[m, n], out)
}

/// Gradients of `matmul(a, b)` with respect to `a` and `b`.
pub fn matmul_backward(a: &Tensor, b: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor)> {
    Ok((matmul_nt(dy, b)?, matmul_tn(a, dy)?))
}

/// Adds `b` (length `cols`) to every row of `x`.
pub fn add_bias(x: &Tensor, b: &Tensor) -> Result<Tensor> {
    let c = x.cols();
    if b.len() != c {
        return Err(Error::shape("add_bias", x.shape(), b.shape()));
    }
    let mut out = x.clone();
    for row in out.data_mut().chunks_exact_mut(c.max(1)) {
        for (o, bv) in row.iter_mut().zip(b.data()) {
            *o += bv;
        }
    }
    Ok(out)
}

/// Returns `(dx, db)`; `db` is the column sum of `dy`.
pub fn add_bias_backward(dy: &Tensor) -> (Tensor, Tensor) {
    let c = dy.cols();
    let mut db = vec![0.0; c];
    for row in dy.data().chunks_exact(c.max(1)) {
        for (d, v) in db.iter_mut().zip(row) {
            *d += v;
        }
    }
    (dy.clone(), Tensor::new(&[c], db).expect("bias length"))
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    same_shape("add", a, b)?;
    let mut out = a.clone();
    out.add_assign(b)?;
    Ok(out)
}

pub fn hadamard(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    same_shape("hadamard", a, b)?;
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    Tensor::new(a.shape(), data)
}

/// Returns `(da, db)`.
pub fn hadamard_backward(a: &Tensor, b: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor)> {
    Ok((hadamard(dy, b)?, hadamard(dy, a)?))
}

pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    x.map(sigmoid_scalar)
}

/// Backward through a sigmoid given its output `y`.
pub fn sigmoid_backward(y: &Tensor, dy: &Tensor) -> Result<Tensor> {
    same_shape("sigmoid_backward", y, dy)?;
    let data = y.data().iter().zip(dy.data()).map(|(&s, &g)| g * s * (1.0 - s)).collect();
    Tensor::new(y.shape(), data)
}

pub fn tanh(x: &Tensor) -> Tensor {
    x.map(f64::tanh)
}

/// Backward through tanh given its output `y`.
pub fn tanh_backward(y: &Tensor, dy: &Tensor) -> Result<Tensor> {
    same_shape("tanh_backward", y, dy)?;
    let data = y.data().iter().zip(dy.data()).map(|(&t, &g)| g * (1.0 - t * t)).collect();
    Tensor::new(y.shape(), data)
}

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Backward through relu given its input `x`.
pub fn relu_backward(x: &Tensor, dy: &Tensor) -> Result<Tensor> {
    same_shape("relu_backward", x, dy)?;
    let data = x
        .data()
        .iter()
        .zip(dy.data())
        .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(x.shape(), data)
}

/// Row-wise softmax with the row maximum subtracted first.
pub fn softmax_rows(x: &Tensor) -> Tensor {
    let c = x.cols().max(1);
    let mut out = x.clone();
    for row in out.data_mut().chunks_exact_mut(c) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}

/// Backward through softmax given its output `y`.
pub fn softmax_rows_backward(y: &Tensor, dy: &Tensor) -> Result<Tensor> {
    same_shape("softmax_rows_backward", y, dy)?;
    let c = y.cols().max(1);
    let mut out = Vec::with_capacity(y.len());
    for (yr, gr) in y.data().chunks_exact(c).zip(dy.data().chunks_exact(c)) {
        let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
        out.extend(yr.iter().zip(gr).map(|(s, g)| s * (g - dot)));
    }
    Tensor::new(y.shape(), out)
}

/// Concatenates matrices with equal row counts along the column axis.
pub fn concat_cols(parts: &[&Tensor]) -> Result<Tensor> {
    let rows = parts.first().map_or(0, |t| t.rows());
    if let Some(t) = parts.iter().find(|t| t.rows() != rows) {
        return Err(Error::shape("concat_cols", &[rows], t.shape()));
    }
    let width: usize = parts.iter().map(|t| t.cols()).sum();
    let mut out = Vec::with_capacity(rows * width);
    for i in 0..rows {
        for t in parts {
            out.extend_from_slice(t.row(i));
        }
    }
    Tensor::new(&[rows, width], out)
}

/// Splits a column-concatenated gradient back into parts of `widths`.
pub fn concat_cols_backward(dy: &Tensor, widths: &[usize]) -> Result<Vec<Tensor>> {
    if widths.iter().sum::<usize>() != dy.cols() {
        return Err(Error::shape("concat_cols_backward", dy.shape(), widths));
    }
    let rows = dy.rows();
    let mut parts: Vec<Vec<f64>> = widths.iter().map(|w| Vec::with_capacity(rows * w)).collect();
    for i in 0..rows {
        let mut at = 0;
        for (p, &w) in parts.iter_mut().zip(widths) {
            p.extend_from_slice(&dy.row(i)[at..at + w]);
            at += w;
        }
    }
    parts
        .into_iter()
        .zip(widths)
        .map(|(p, &w)| Tensor::new(&[rows, w], p))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Identity,
    Relu,
    Sigmoid,
    Tanh,
    Softmax,
}

impl Activation {
    pub fn forward(self, x: &Tensor) -> Tensor {
        match self {
            Activation::Identity => x.clone(),
            Activation::Relu => relu(x),
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => tanh(x),
            Activation::Softmax => softmax_rows(x),
        }
    }

    /// Gradient with respect to the pre-activation `x`, whose output was `y`.
    pub fn backward(self, x: &Tensor, y: &Tensor, dy: &Tensor) -> Result<Tensor> {
        match self {
            Activation::Identity => Ok(dy.clone()),
            Activation::Relu => relu_backward(x, dy),
            Activation::Sigmoid => sigmoid_backward(y, dy),
            Activation::Tanh => tanh_backward(y, dy),
            Activation::Softmax => softmax_rows_backward(y, dy),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::grad_check;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
        let n = shape.iter().product();
        Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.5..1.5)).collect()).unwrap()
    }

    /// Weighted sum of `y` with fixed weights, the scalar used in the checks.
    fn probe(y: &Tensor, w: &Tensor) -> f64 {
        y.data().iter().zip(w.data()).map(|(a, b)| a * b).sum()
    }

    /// Checks d(probe(f(x)))/dx from `backward` against central differences.
    fn check_unary(
        shape: &[usize],
        seed: u64,
        f: impl Fn(&Tensor) -> Tensor,
        backward: impl Fn(&Tensor, &Tensor, &Tensor) -> Tensor,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random(shape, &mut rng);
        let w = random(&f(&x).shape().to_vec(), &mut rng);
        grad_check(
            |v| {
                let x = Tensor::new(shape, v.to_vec())?;
                let y = f(&x);
                Ok((probe(&y, &w), backward(&x, &y, &w).into_data()))
            },
            x.data(),
            1e-6,
        )
        .unwrap()
    }

    #[test]
    fn scalar_oracles() {
        assert_eq!(sigmoid_scalar(0.0), 0.5);
        assert_eq!(tanh(&Tensor::scalar(0.0)).data()[0], 0.0);
        let s = softmax_rows(&Tensor::full(&[1, 6], 3.7));
        for v in s.data() {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn matmul_small_product() {
        let a = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Tensor::from_rows(&[vec![5.0], vec![6.0]]).unwrap();
        assert_eq!(matmul(&a, &b).unwrap().data(), &[17.0, 39.0]);
        let bt = Tensor::from_rows(&[vec![5.0, 6.0]]).unwrap();
        assert_eq!(matmul_nt(&a, &bt).unwrap().data(), &[17.0, 39.0]);
        assert_eq!(matmul_tn(&a, &a).unwrap().data(), &[10.0, 14.0, 14.0, 20.0]);
    }

    #[test]
    fn shape_errors_name_both_shapes() {
        let err = matmul(&Tensor::zeros(&[4, 3]), &Tensor::zeros(&[2, 2])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[4, 3]") && msg.contains("[2, 2]"), "{msg}");
    }

    #[test]
    fn matmul_backward_matches_finite_differences() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random(&[4, 3], &mut rng);
            let b = random(&[3, 2], &mut rng);
            let w = random(&[4, 2], &mut rng);
            let (da, db) = matmul_backward(&a, &b, &w).unwrap();
            let ea = grad_check(
                |v| {
                    let a = Tensor::new(&[4, 3], v.to_vec())?;
                    Ok((probe(&matmul(&a, &b)?, &w), da.data().to_vec()))
                },
                a.data(),
                1e-6,
            )
            .unwrap();
            let eb = grad_check(
                |v| {
                    let b = Tensor::new(&[3, 2], v.to_vec())?;
                    Ok((probe(&matmul(&a, &b)?, &w), db.data().to_vec()))
                },
                b.data(),
                1e-6,
            )
            .unwrap();
            assert!(ea < 1e-6 && eb < 1e-6, "seed {seed}: {ea} {eb}");
        }
    }

    #[test]
    fn elementwise_backwards_match_finite_differences() {
        for seed in 0..20 {
            let shape = [3, 5];
            let errs = [
                check_unary(&shape, seed, sigmoid, |_, y, w| sigmoid_backward(y, w).unwrap()),
                check_unary(&shape, seed, tanh, |_, y, w| tanh_backward(y, w).unwrap()),
                check_unary(&shape, seed, relu, |x, _, w| relu_backward(x, w).unwrap()),
                check_unary(&shape, seed, softmax_rows, |_, y, w| softmax_rows_backward(y, w).unwrap()),
            ];
            for (i, e) in errs.iter().enumerate() {
                assert!(*e < 1e-6, "seed {seed} op {i}: {e}");
            }
        }
    }

    #[test]
    fn bias_hadamard_concat_backwards() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random(&[4, 3], &mut rng);
            let b = random(&[3], &mut rng);
            let c = random(&[4, 3], &mut rng);
            let w = random(&[4, 3], &mut rng);
            let (_, db) = add_bias_backward(&w);
            let e = grad_check(
                |v| {
                    let b = Tensor::new(&[3], v.to_vec())?;
                    Ok((probe(&add_bias(&x, &b)?, &w), db.data().to_vec()))
                },
                b.data(),
                1e-6,
            )
            .unwrap();
            assert!(e < 1e-6);
            let (dx, _) = hadamard_backward(&x, &c, &w).unwrap();
            let e = grad_check(
                |v| {
                    let x = Tensor::new(&[4, 3], v.to_vec())?;
                    Ok((probe(&hadamard(&x, &c)?, &w), dx.data().to_vec()))
                },
                x.data(),
                1e-6,
            )
            .unwrap();
            assert!(e < 1e-6);
            let wide = random(&[4, 6], &mut rng);
            let parts = concat_cols_backward(&wide, &[3, 3]).unwrap();
            let e = grad_check(
                |v| {
                    let x = Tensor::new(&[4, 3], v.to_vec())?;
                    Ok((probe(&concat_cols(&[&x, &c])?, &wide), parts[0].data().to_vec()))
                },
                x.data(),
                1e-6,
            )
            .unwrap();
            assert!(e < 1e-6);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = random(&[7, 6], &mut rng).map(|v| v * 20.0);
            let y = softmax_rows(&x);
            for row in y.data().chunks(6) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
            }
        }
    }
}
