use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::nn::Tensor;

/// Summed loss over the valid targets of a batch, with the gradient of that
/// sum with respect to the logits (zero rows for invalid targets).
#[derive(Debug, Clone, PartialEq)]
pub struct LossSum {
    pub sum: f64,
    pub n_valid: usize,
    pub grad: Tensor,
    /// Valid rows whose arg-max (or thresholded) prediction hits the target.
    pub correct: usize,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logit-form binary cross-entropy. `logits` is `[B, 1]`; targets are 0/1.
pub fn bce_with_logits(logits: &Tensor, targets: &[Option<usize>]) -> Result<LossSum> {
    if logits.cols() != 1 || logits.rows() != targets.len() {
        return Err(Error::shape("bce_with_logits", logits.shape(), &[targets.len(), 1]));
    }
    let mut grad = vec![0.0; targets.len()];
    let (mut sum, mut n_valid, mut correct) = (0.0, 0, 0);
    for (i, t) in targets.iter().enumerate() {
        let Some(t) = *t else { continue };
        if t > 1 {
            return Err(Error::InvalidArgument(format!("binary target {t}")));
        }
        let (z, y) = (logits.data()[i], t as f64);
        // -[y ln σ(z) + (1-y) ln(1-σ(z))] = softplus(z) - y z
        sum += softplus(z) - y * z;
        grad[i] = crate::nn::ops::sigmoid_scalar(z) - y;
        n_valid += 1;
        correct += usize::from(usize::from(z > 0.0) == t);
    }
    Ok(LossSum {
        sum,
        n_valid,
        grad: Tensor::new(logits.shape(), grad)?,
        correct,
    })
}

/// Fused softmax + categorical cross-entropy over `[B, C]` logits.
pub fn softmax_cross_entropy(logits: &Tensor, targets: &[Option<usize>]) -> Result<LossSum> {
    if logits.rows() != targets.len() {
        return Err(Error::shape("softmax_cross_entropy", logits.shape(), &[targets.len()]));
    }
    let c = logits.cols();
    let mut grad = vec![0.0; logits.len()];
    let (mut sum, mut n_valid, mut correct) = (0.0, 0, 0);
    for (i, t) in targets.iter().enumerate() {
        let Some(t) = *t else { continue };
        if t >= c {
            return Err(Error::InvalidArgument(format!("target {t} outside {c} classes")));
        }
        let z = logits.row(i);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        sum += lse - z[t];
        let g = &mut grad[i * c..(i + 1) * c];
        for (gj, zj) in g.iter_mut().zip(z) {
            *gj = (zj - lse).exp();
        }
        g[t] -= 1.0;
        n_valid += 1;
        let best = (0..c).fold(0, |b, j| if z[j] > z[b] { j } else { b });
        correct += usize::from(best == t);
    }
    Ok(LossSum {
        sum,
        n_valid,
        grad: Tensor::new(logits.shape(), grad)?,
        correct,
    })
}

/// The loss used to train `task`: BCE for event, softmax CE otherwise.
pub fn task_loss(task: Task, logits: &Tensor, targets: &[Option<usize>]) -> Result<LossSum> {
    match task {
        Task::Event => bce_with_logits(logits, targets),
        _ => softmax_cross_entropy(logits, targets),
    }
}

fn mean(l: LossSum) -> Result<(f64, Tensor)> {
    if l.n_valid == 0 {
        return Err(Error::Empty("batch with valid labels"));
    }
    let n = l.n_valid as f64;
    let mut g = l.grad;
    g.scale(1.0 / n);
    Ok((l.sum / n, g))
}

/// Batch-mean BCE and its logit gradient.
pub fn binary_cross_entropy(logits: &Tensor, targets: &[Option<usize>]) -> Result<(f64, Tensor)> {
    mean(bce_with_logits(logits, targets)?)
}

/// Batch-mean categorical CE over valid targets and its logit gradient.
pub fn categorical_cross_entropy(logits: &Tensor, targets: &[Option<usize>]) -> Result<(f64, Tensor)> {
    mean(softmax_cross_entropy(logits, targets)?)
}
