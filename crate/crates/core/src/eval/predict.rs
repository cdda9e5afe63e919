use rayon::prelude::*;

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::layers::Model;
use crate::nn::Tensor;

const INFERENCE_CHUNK: usize = 256;

/// Samples of a dataset that carry a label for `task`, with their targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskExamples {
    pub indices: Vec<usize>,
    pub targets: Vec<usize>,
}

impl TaskExamples {
    pub fn new(dataset: &Dataset, task: Task) -> Self {
        let (indices, targets) = dataset
            .samples
            .iter()
            .enumerate()
            .filter_map(|(i, s)| task.target(&s.labels).map(|t| (i, t)))
            .unzip();
        Self { indices, targets }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Stacks the selected samples into a `[B, N*3*K]` f64 batch.
pub fn batch_features(dataset: &Dataset, indices: &[usize]) -> Result<Tensor> {
    let width = dataset.feature_len();
    let mut data = Vec::with_capacity(indices.len() * width);
    for &i in indices {
        data.extend(dataset.samples[i].features.iter().map(|&x| f64::from(x)));
    }
    Tensor::new(&[indices.len(), width], data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub examples: TaskExamples,
    pub predicted: Vec<usize>,
    /// Class probabilities per example; a single fault probability for event.
    pub probabilities: Vec<Vec<f64>>,
}

fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > row[best] { i } else { best })
}

/// Dropout-free inference over every labeled example of `task`.
pub fn predict(model: &Model, dataset: &Dataset, task: Task) -> Result<Predictions> {
    let examples = TaskExamples::new(dataset, task);
    if examples.is_empty() {
        return Err(Error::Task(format!("dataset has no samples labeled for {task}")));
    }
    let chunks: Vec<Tensor> = examples
        .indices
        .par_chunks(INFERENCE_CHUNK)
        .map(|idx| {
            let x = batch_features(dataset, idx)?;
            model.predict_proba(&x, task)
        })
        .collect::<Result<_>>()?;
    let mut probabilities = Vec::with_capacity(examples.len());
    let mut predicted = Vec::with_capacity(examples.len());
    for p in &chunks {
        for r in 0..p.rows() {
            let row = p.row(r);
            predicted.push(match task {
                Task::Event => usize::from(row[0] > 0.5),
                _ => argmax(row),
            });
            probabilities.push(row.to_vec());
        }
    }
    Ok(Predictions {
        examples,
        predicted,
        probabilities,
    })
}

/// Accuracy of `model` on the labeled examples of `task`.
pub fn task_accuracy(model: &Model, dataset: &Dataset, task: Task) -> Result<f64> {
    let p = predict(model, dataset, task)?;
    super::accuracy(&p.predicted, &p.examples.targets)
}
