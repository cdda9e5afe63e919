use super::Tensor;
use crate::error::{Error, Result};

/// A trainable value with its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub value: Tensor,
    pub grad: Tensor,
    /// Frozen parameters are skipped by the optimizer.
    pub frozen: bool,
}

impl Parameter {
    pub fn new(value: Tensor) -> Self {
        let grad = Tensor::zeros(value.shape());
        Self {
            value,
            grad,
            frozen: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named parameter registry in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    params: Vec<Parameter>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> Result<ParamId> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(Error::InvalidArgument(format!("duplicate parameter `{name}`")));
        }
        self.names.push(name);
        self.params.push(Parameter::new(value));
        Ok(ParamId(self.params.len() - 1))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn get(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter {
        &mut self.params[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Parameter)> {
        self.names
            .iter()
            .zip(&self.params)
            .enumerate()
            .map(|(i, (n, p))| (ParamId(i), n.as_str(), p))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = (&str, &mut Parameter)> {
        self.names.iter().map(String::as_str).zip(self.params.iter_mut())
    }

    /// Total number of scalar values.
    pub fn n_values(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn n_trainable(&self) -> usize {
        self.params.iter().filter(|p| !p.frozen).map(|p| p.value.len()).sum()
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.fill(0.0);
        }
    }

    /// Copies reduced gradients into the parameters' gradient buffers.
    pub fn set_grads(&mut self, grads: &Grads) -> Result<()> {
        if grads.0.len() != self.params.len() {
            return Err(Error::shape("set_grads", &[self.params.len()], &[grads.0.len()]));
        }
        for (p, g) in self.params.iter_mut().zip(&grads.0) {
            if p.value.shape() != g.shape() {
                return Err(Error::shape("set_grads", p.value.shape(), g.shape()));
            }
            p.grad = g.clone();
        }
        Ok(())
    }

    pub fn set_frozen_where(&mut self, frozen: bool, pred: impl Fn(&str) -> bool) {
        for (name, p) in self.names.iter().zip(&mut self.params) {
            if pred(name) {
                p.frozen = frozen;
            }
        }
    }

    pub fn unfreeze_all(&mut self) {
        self.params.iter_mut().for_each(|p| p.frozen = false);
    }

    pub fn any_frozen(&self) -> bool {
        self.params.iter().any(|p| p.frozen)
    }
}

/// Gradient buffers aligned with a [`ParamStore`], accumulated outside the
/// store so that several workers can fill their own copies.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads(Vec<Tensor>);

impl Grads {
    pub fn zeros_like(store: &ParamStore) -> Self {
        Grads(store.params.iter().map(|p| Tensor::zeros(p.value.shape())).collect())
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.0[id.0]
    }

    pub fn accumulate(&mut self, id: ParamId, g: &Tensor) -> Result<()> {
        self.0[id.0].add_assign(g)
    }

    pub fn add(&mut self, other: &Grads) -> Result<()> {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.add_assign(b)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        self.0.iter_mut().for_each(|t| t.scale(s));
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.0
    }

    /// Flattened copy of every gradient, in registry order.
    pub fn flatten(&self) -> Vec<f64> {
        self.0.iter().flat_map(|t| t.data().iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_ordered() {
        let mut s = ParamStore::new();
        let a = s.add("a", Tensor::zeros(&[2])).unwrap();
        let b = s.add("b", Tensor::zeros(&[3, 1])).unwrap();
        assert!(s.add("a", Tensor::zeros(&[1])).is_err());
        assert_eq!(s.id("b"), Some(b));
        assert_eq!(s.iter().map(|(_, n, _)| n).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(s.get(a).grad.shape(), &[2]);
        assert_eq!(s.n_values(), 5);
    }

    #[test]
    fn freezing_by_prefix() {
        let mut s = ParamStore::new();
        s.add("trunk.w", Tensor::zeros(&[2])).unwrap();
        s.add("head.w", Tensor::zeros(&[2])).unwrap();
        s.set_frozen_where(true, |n| n.starts_with("trunk."));
        assert_eq!(s.n_trainable(), 2);
        s.unfreeze_all();
        assert!(!s.any_frozen());
    }
}
