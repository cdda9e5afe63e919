use crate::error::{Error, Result};
use crate::nn::{ParamStore, Tensor};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Bias-corrected Adam moments for every parameter of a store.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    t: u64,
}

impl AdamState {
    pub fn new(store: &ParamStore) -> Self {
        let zeros: Vec<Tensor> = store.iter().map(|(_, _, p)| Tensor::zeros(p.value.shape())).collect();
        Self {
            beta1: BETA1,
            beta2: BETA2,
            epsilon: EPSILON,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Applies one update from the gradients held in `store`. Frozen
    /// parameters and their moments are left untouched.
    pub fn step(&mut self, store: &mut ParamStore, lr: f64) -> Result<()> {
        if !(lr > 0.0) || !lr.is_finite() {
            return Err(Error::InvalidArgument(format!("learning rate {lr}")));
        }
        if store.len() != self.m.len() {
            return Err(Error::shape("adam_step", &[store.len()], &[self.m.len()]));
        }
        for (_, name, p) in store.iter() {
            if !p.frozen && !p.grad.is_finite() {
                return Err(Error::NonFinite(format!("gradient of `{name}`")));
            }
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        for (((_, p), m), v) in store.params_mut().zip(&mut self.m).zip(&mut self.v) {
            if p.frozen {
                continue;
            }
            let w = p.value.data_mut();
            for (((w, &g), m), v) in w.iter_mut().zip(p.grad.data()).zip(m.data_mut()).zip(v.data_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *w -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_store(w: f64) -> ParamStore {
        let mut s = ParamStore::new();
        s.add("w", Tensor::scalar(w)).unwrap();
        s
    }

    fn set_grad(s: &mut ParamStore, g: f64) {
        s.params_mut().next().unwrap().1.grad = Tensor::scalar(g);
    }

    fn w(s: &ParamStore) -> f64 {
        s.iter().next().unwrap().2.value.data()[0]
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut s = scalar_store(1.0);
        let mut a = AdamState::new(&s);
        a.step(&mut s, 0.01).unwrap();
        assert_eq!(w(&s), 1.0);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut s = scalar_store(1.0);
        let mut a = AdamState::new(&s);
        set_grad(&mut s, 0.5);
        a.step(&mut s, 0.01).unwrap();
        // m̂ = 0.5, v̂ = 0.25
        let expected = 1.0 - 0.01 * 0.5 / (0.25f64.sqrt() + 1e-8);
        assert!((w(&s) - expected).abs() < 1e-15);
        assert!((w(&s) - 0.99).abs() < 1e-9);
    }

    #[test]
    fn two_steps_on_square_match_reference() {
        // Hand-rolled reference on f(w) = w², g = 2w.
        let (lr, mut wr, mut m, mut v) = (0.01, 1.0f64, 0.0f64, 0.0f64);
        for t in 1..=2 {
            let g = 2.0 * wr;
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let mh = m / (1.0 - 0.9f64.powi(t));
            let vh = v / (1.0 - 0.999f64.powi(t));
            wr -= lr * mh / (vh.sqrt() + 1e-8);
        }
        let mut s = scalar_store(1.0);
        let mut a = AdamState::new(&s);
        for _ in 0..2 {
            let g = 2.0 * w(&s);
            set_grad(&mut s, g);
            a.step(&mut s, lr).unwrap();
        }
        assert!((w(&s) - wr).abs() < 1e-12);
        assert_eq!(a.steps(), 2);
    }

    #[test]
    fn frozen_parameters_are_bitwise_untouched() {
        let mut s = scalar_store(0.123456789);
        s.add("u", Tensor::scalar(2.0)).unwrap();
        s.set_frozen_where(true, |n| n == "w");
        for (_, p) in s.params_mut() {
            p.grad = Tensor::scalar(1.0);
        }
        let mut a = AdamState::new(&s);
        a.step(&mut s, 0.1).unwrap();
        let vals: Vec<f64> = s.iter().map(|(_, _, p)| p.value.data()[0]).collect();
        assert_eq!(vals[0].to_bits(), 0.123456789f64.to_bits());
        assert!(vals[1] < 2.0);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut s = scalar_store(1.0);
        let mut a = AdamState::new(&s);
        set_grad(&mut s, f64::NAN);
        match a.step(&mut s, 0.01) {
            Err(Error::NonFinite(m)) => assert!(m.contains("`w`")),
            other => panic!("{other:?}"),
        }
        assert_eq!(w(&s), 1.0);
    }
}
