use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::{Grads, ParamStore, Tensor};

/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares the gradient returned by `f` at `x` with central differences
/// `(f(x + eps) - f(x - eps)) / 2 eps` and returns the largest relative
/// error over all coordinates.
///
/// `f` returns the scalar value and its analytic gradient; only the gradient
/// from the unperturbed call is used.
pub fn grad_check<F>(mut f: F, x: &[f64], eps: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("grad_check input".into()));
    }
    let (value, analytic) = f(x)?;
    if analytic.len() != x.len() {
        return Err(Error::shape("grad_check", &[x.len()], &[analytic.len()]));
    }
    if !value.is_finite() || analytic.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("grad_check output".into()));
    }
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        probe[i] = x[i] + eps;
        let plus = f(&probe)?.0;
        probe[i] = x[i] - eps;
        let minus = f(&probe)?.0;
        probe[i] = x[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite("grad_check output".into()));
        }
        let numeric = (plus - minus) / (2.0 * eps);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    Ok(worst)
}

/// Tensor with entries uniform in [-1, 1).
pub fn random_tensor(shape: &[usize], rng: &mut impl Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("length matches shape")
}

fn probe(y: &Tensor, w: &Tensor) -> f64 {
    y.data().iter().zip(w.data()).map(|(a, b)| a * b).sum()
}

/// Max relative error of input and parameter gradients of a layer, using a
/// fixed random projection of the output as the scalar objective.
pub fn check_layer<C>(
    store: &ParamStore,
    seed: u64,
    input_shape: &[usize],
    forward: impl Fn(&ParamStore, &Tensor) -> Result<(Tensor, C)>,
    backward: impl Fn(&ParamStore, &C, &Tensor, &mut Grads) -> Result<Tensor>,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let x = random_tensor(input_shape, &mut rng);
    let (y, _) = forward(store, &x)?;
    let w = random_tensor(y.shape(), &mut rng);

    let analytic = |store: &ParamStore, x: &Tensor| {
        let (y, cache) = forward(store, x)?;
        let mut grads = Grads::zeros_like(store);
        let dx = backward(store, &cache, &w, &mut grads)?;
        Ok::<_, Error>((probe(&y, &w), dx, grads))
    };

    let input_err = grad_check(
        |v| {
            let x = Tensor::new(input_shape, v.to_vec())?;
            let (value, dx, _) = analytic(store, &x)?;
            Ok((value, dx.into_data()))
        },
        x.data(),
        1e-6,
    )?;

    let flat: Vec<f64> = store.iter().flat_map(|(_, _, p)| p.value.data().to_vec()).collect();
    let rebuild = |v: &[f64]| {
        let mut s = store.clone();
        let mut at = 0;
        for (_, p) in s.params_mut() {
            let n = p.value.len();
            p.value.data_mut().copy_from_slice(&v[at..at + n]);
            at += n;
        }
        s
    };
    let param_err = grad_check(
        |v| {
            let (value, _, grads) = analytic(&rebuild(v), &x)?;
            Ok((value, grads.flatten()))
        },
        &flat,
        1e-6,
    )?;
    Ok(input_err.max(param_err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let e = grad_check(|x| Ok((x[0] * x[0], vec![2.0 * x[0]])), &[3.0], 1e-6).unwrap();
        assert!(e < 1e-9, "{e}");
    }

    #[test]
    fn doubled_gradient_is_caught() {
        let e = grad_check(|x| Ok((x[0] * x[0], vec![4.0 * x[0]])), &[3.0], 1e-6).unwrap();
        assert!((e - 0.5).abs() < 1e-6, "{e}");
    }

    #[test]
    fn non_finite_output_is_an_error() {
        let r = grad_check(|x| Ok((x[0].ln(), vec![1.0 / x[0]])), &[1e-7], 1e-6);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
