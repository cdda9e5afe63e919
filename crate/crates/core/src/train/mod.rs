//! Losses, Adam, learning-rate schedules, the training loop, and the
//! trunk-transfer / fine-tuning workflow.

mod adam;
mod loss;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{derive_seed, Dataset, Task};
use crate::error::{Error, Result};
use crate::eval::{batch_features, task_accuracy, TaskExamples};
use crate::layers::{Mode, Model};
use crate::nn::Grads;

pub use adam::{AdamState, BETA1, BETA2, EPSILON};
pub use loss::{
    bce_with_logits, binary_cross_entropy, categorical_cross_entropy, softmax_cross_entropy, task_loss, LossSum,
};

const TAG_SHUFFLE: u64 = 0x5348_5546;
const TAG_DROPOUT: u64 = 0x4452_4f50;
const TAG_HEAD: u64 = 0x4845_4144;
const TAG_FINE: u64 = 0x4649_4e45;

/// Piecewise-constant learning rate over 0-based epoch indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LrSchedule {
    pub initial: f64,
    pub decayed: f64,
    /// First epoch trained at `decayed`.
    pub drop_epoch: usize,
}

impl Default for LrSchedule {
    fn default() -> Self {
        Self {
            initial: 0.01,
            decayed: 0.001,
            drop_epoch: 120,
        }
    }
}

impl LrSchedule {
    pub fn constant(lr: f64) -> Self {
        Self {
            initial: lr,
            decayed: lr,
            drop_epoch: usize::MAX,
        }
    }

    pub fn lr(&self, epoch: usize) -> f64 {
        if epoch < self.drop_epoch {
            self.initial
        } else {
            self.decayed
        }
    }

    pub fn validate(&self) -> Result<()> {
        for lr in [self.initial, self.decayed] {
            if !(lr > 0.0) || !lr.is_finite() {
                return Err(Error::InvalidArgument(format!("learning rate {lr} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub task: Task,
    pub epochs: usize,
    pub batch_size: usize,
    pub schedule: LrSchedule,
    pub dropout: f64,
    pub seed: u64,
    /// Samples per parallel forward/backward unit. Gradients are reduced in
    /// chunk order, so results do not depend on the thread count.
    pub chunk_size: usize,
    /// Write a checkpoint every this many epochs (CLI only).
    pub checkpoint_every: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            task: Task::Event,
            epochs: 150,
            batch_size: 250,
            schedule: LrSchedule::default(),
            dropout: 0.1,
            seed: 0,
            chunk_size: 25,
            checkpoint_every: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.chunk_size == 0 {
            return Err(Error::InvalidArgument("batch and chunk sizes must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if self.checkpoint_every == Some(0) {
            return Err(Error::InvalidArgument("checkpoint interval must be at least 1".into()));
        }
        self.schedule.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 0-based epoch index.
    pub epoch: usize,
    pub lr: f64,
    /// Mean training loss over the epoch's minibatches.
    pub loss: f64,
    /// Running accuracy of the training-mode forward passes.
    pub accuracy: f64,
    pub holdout_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct History {
    pub records: Vec<EpochRecord>,
}

impl History {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "lr", "loss", "accuracy", "holdout_accuracy"])?;
        for r in &self.records {
            w.write_record([
                r.epoch.to_string(),
                r.lr.to_string(),
                format!("{:.8}", r.loss),
                format!("{:.6}", r.accuracy),
                r.holdout_accuracy.map(|a| format!("{a:.6}")).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trains `model` on the samples of `dataset` labeled for `config.task`.
pub fn train(model: &mut Model, dataset: &Dataset, config: &TrainConfig) -> Result<History> {
    train_with(model, dataset, config, None, |_, _| Ok(()))
}

/// [`train`] with an optional held-out set, scored after every epoch, and a
/// callback run at the end of each epoch.
pub fn train_with<F>(
    model: &mut Model,
    dataset: &Dataset,
    config: &TrainConfig,
    holdout: Option<&Dataset>,
    mut on_epoch: F,
) -> Result<History>
where
    F: FnMut(&EpochRecord, &Model) -> Result<()>,
{
    config.validate()?;
    let task = config.task;
    if !model.has_head(task) {
        return Err(Error::Task(format!("model has no {task} head")));
    }
    let examples = TaskExamples::new(dataset, task);
    if examples.is_empty() {
        return Err(Error::Empty("training examples for the task"));
    }
    model.set_dropout(config.dropout)?;
    let mut adam = AdamState::new(&model.store);
    let mut history = History::default();

    for epoch in 0..config.epochs {
        let lr = config.schedule.lr(epoch);
        let mut order: Vec<usize> = (0..examples.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[TAG_SHUFFLE, epoch as u64])));
        let (mut loss, mut correct) = (0.0, 0);
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let m: &Model = model;
            let parts = batch
                .par_chunks(config.chunk_size)
                .enumerate()
                .map(|(c, chunk)| {
                    let samples: Vec<usize> = chunk.iter().map(|&i| examples.indices[i]).collect();
                    let targets: Vec<Option<usize>> = chunk.iter().map(|&i| Some(examples.targets[i])).collect();
                    let x = batch_features(dataset, &samples)?;
                    let seed = derive_seed(config.seed, &[TAG_DROPOUT, epoch as u64, b as u64, c as u64]);
                    let (z, cache) = m.forward(&x, task, Mode::train(seed))?;
                    let l = task_loss(task, &z, &targets)?;
                    let mut g = Grads::zeros_like(&m.store);
                    m.backward(&cache, &l.grad, &mut g)?;
                    Ok((g, l))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut parts = parts.into_iter();
            let (mut grads, first) = parts.next().expect("batch is non-empty");
            let (mut sum, mut n_valid) = (first.sum, first.n_valid);
            correct += first.correct;
            for (g, l) in parts {
                grads.add(&g)?;
                sum += l.sum;
                n_valid += l.n_valid;
                correct += l.correct;
            }
            grads.scale(1.0 / n_valid as f64);
            loss += sum;
            model.store.set_grads(&grads)?;
            adam.step(&mut model.store, lr)?;
        }
        let record = EpochRecord {
            epoch,
            lr,
            loss: loss / examples.len() as f64,
            accuracy: correct as f64 / examples.len() as f64,
            holdout_accuracy: holdout.map(|h| task_accuracy(model, h, task)).transpose()?,
        };
        if !record.loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
        }
        on_epoch(&record, model)?;
        history.records.push(record);
    }
    Ok(history)
}

/// Freeze-trigger and fine-tuning settings for trunk transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferPlan {
    /// Minimum event accuracy of the source model on its training set.
    pub trigger: f64,
    /// Epochs of head-only training on the frozen trunk.
    pub head_epochs: usize,
    pub fine_tune_lr: f64,
    pub fine_tune_epochs: usize,
    pub targets: Vec<Task>,
}

impl Default for TransferPlan {
    fn default() -> Self {
        Self {
            trigger: 0.95,
            head_epochs: 50,
            fine_tune_lr: 0.001,
            fine_tune_epochs: 50,
            targets: vec![Task::Type, Task::Phase, Task::Location],
        }
    }
}

impl TransferPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.trigger > 0.0 && self.trigger <= 1.0) {
            return Err(Error::InvalidArgument(format!("trigger {} outside (0, 1]", self.trigger)));
        }
        if !(self.fine_tune_lr > 0.0) {
            return Err(Error::InvalidArgument("fine-tune learning rate must be positive".into()));
        }
        if self.targets.contains(&Task::Event) {
            return Err(Error::InvalidArgument("event is the transfer source task".into()));
        }
        Ok(())
    }
}

pub fn check_trigger(accuracy: f64, trigger: f64) -> Result<()> {
    if accuracy < trigger {
        return Err(Error::TriggerUnmet { accuracy, trigger });
    }
    Ok(())
}

/// Builds a `task` model around the source trunk, freezes the trunk and
/// trains the new head for `plan.head_epochs`.
pub fn transfer(
    source: &Model,
    plan: &TransferPlan,
    task: Task,
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<(Model, History)> {
    transfer_with(source, plan, task, dataset, config, |_, _| Ok(()))
}

pub fn transfer_with<F>(
    source: &Model,
    plan: &TransferPlan,
    task: Task,
    dataset: &Dataset,
    config: &TrainConfig,
    on_epoch: F,
) -> Result<(Model, History)>
where
    F: FnMut(&EpochRecord, &Model) -> Result<()>,
{
    plan.validate()?;
    if task == Task::Event {
        return Err(Error::Task("event is the transfer source task".into()));
    }
    check_trigger(task_accuracy(source, dataset, Task::Event)?, plan.trigger)?;
    let mut spec = source.spec().clone();
    spec.heads = vec![task];
    spec.seed = derive_seed(config.seed, &[TAG_HEAD, task as u64]);
    let mut model = Model::new(spec, &dataset.adjacency()?)?;
    model.copy_trunk_from(source)?;
    model.set_trunk_frozen(true);
    let cfg = TrainConfig {
        task,
        epochs: plan.head_epochs,
        ..config.clone()
    };
    let history = train_with(&mut model, dataset, &cfg, None, on_epoch)?;
    Ok((model, history))
}

/// Unfreezes every parameter and trains at a constant `lr` with a fresh
/// optimizer state.
pub fn fine_tune(model: &mut Model, dataset: &Dataset, config: &TrainConfig, lr: f64, epochs: usize) -> Result<History> {
    model.store.unfreeze_all();
    let cfg = TrainConfig {
        epochs,
        schedule: LrSchedule::constant(lr),
        seed: derive_seed(config.seed, &[TAG_FINE]),
        ..config.clone()
    };
    train(model, dataset, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::separable;
    use crate::layers::{Architecture, ModelSpec};

    fn small_spec(arch: Architecture, heads: &[Task], n: usize, k: usize) -> ModelSpec {
        let mut spec = ModelSpec::new(arch, heads, n, k);
        if arch == Architecture::Ann {
            spec.sizes.trunk = vec![16, 8];
        }
        spec
    }

    fn quick(task: Task, epochs: usize) -> TrainConfig {
        TrainConfig {
            task,
            epochs,
            batch_size: 16,
            chunk_size: 5,
            seed: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn schedule_drops_after_120_epochs() {
        let s = LrSchedule::default();
        assert_eq!(s.lr(119), 0.01);
        assert_eq!(s.lr(120), 0.001);
        assert_eq!(LrSchedule::constant(0.001).lr(10_000), 0.001);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
        let bad = TrainConfig {
            schedule: LrSchedule { initial: 0.0, ..LrSchedule::default() },
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(TransferPlan { trigger: 0.0, ..TransferPlan::default() }.validate().is_err());
    }

    #[test]
    fn separable_toy_set_is_learned() {
        let data = separable(64, 3, 4, 1);
        let mut model = Model::new(small_spec(Architecture::Ann, &[Task::Event], 3, 4), &data.adjacency().unwrap()).unwrap();
        let h = train(&mut model, &data, &quick(Task::Event, 50)).unwrap();
        assert_eq!(h.records.len(), 50);
        assert!(task_accuracy(&model, &data, Task::Event).unwrap() >= 0.99);
        assert!(h.last().unwrap().loss < h.records[0].loss);
    }

    #[test]
    fn training_is_deterministic_across_thread_counts() {
        let data = separable(40, 4, 5, 2);
        let adj = data.adjacency().unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let mut m = Model::new(ModelSpec::new(Architecture::Rgcn, &[Task::Type], 4, 5), &adj).unwrap();
                train(&mut m, &data, &quick(Task::Type, 3)).unwrap();
                m.store.iter().flat_map(|(_, _, p)| p.value.data().to_vec()).map(f64::to_bits).collect::<Vec<_>>()
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn phase_training_skips_undefined_labels() {
        let data = separable(30, 3, 4, 4);
        let mut m = Model::new(small_spec(Architecture::Ann, &[Task::Phase], 3, 4), &data.adjacency().unwrap()).unwrap();
        train(&mut m, &data, &quick(Task::Phase, 1)).unwrap();
        let nf_only = data.with_samples(data.samples.iter().filter(|s| !s.labels.event).cloned().collect());
        assert!(matches!(train(&mut m, &nf_only, &quick(Task::Phase, 1)), Err(Error::Empty(_))));
    }

    #[test]
    fn trigger_below_threshold_is_an_error() {
        match check_trigger(0.93, 0.95) {
            Err(Error::TriggerUnmet { accuracy, trigger }) => assert_eq!((accuracy, trigger), (0.93, 0.95)),
            other => panic!("{other:?}"),
        }
        assert!(check_trigger(0.95, 0.95).is_ok());
    }

    #[test]
    fn transfer_keeps_trunk_and_trains_head() {
        let data = separable(48, 4, 5, 5);
        let adj = data.adjacency().unwrap();
        let mut source = Model::new(ModelSpec::new(Architecture::Rgcn, &[Task::Event], 4, 5), &adj).unwrap();
        train(&mut source, &data, &quick(Task::Event, 30)).unwrap();
        let plan = TransferPlan {
            trigger: 0.9,
            head_epochs: 3,
            ..TransferPlan::default()
        };
        let trunk = source.trunk_values();
        let mut initial_head = None;
        let (mut model, _) = transfer_with(&source, &plan, Task::Location, &data, &quick(Task::Event, 0), |_, m| {
            assert_eq!(m.trunk_values(), trunk);
            initial_head.get_or_insert_with(|| m.store.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(model.trunk_values(), trunk);
        assert!(model.store.any_frozen());
        let head = |m: &Model| -> Vec<f64> {
            m.store
                .iter()
                .filter(|(_, n, _)| n.starts_with("head."))
                .flat_map(|(_, _, p)| p.value.data().to_vec())
                .collect()
        };
        let fresh = Model::new(
            ModelSpec {
                heads: vec![Task::Location],
                seed: derive_seed(3, &[TAG_HEAD, Task::Location as u64]),
                ..source.spec().clone()
            },
            &adj,
        )
        .unwrap();
        assert_ne!(head(&model), head(&fresh));

        let before = model.store.clone();
        fine_tune(&mut model, &data, &quick(Task::Location, 0), 0.001, 0).unwrap();
        assert!(!model.store.any_frozen());
        for ((_, _, a), (_, _, b)) in model.store.iter().zip(before.iter()) {
            assert_eq!(a.value, b.value);
        }
        fine_tune(&mut model, &data, &quick(Task::Location, 0), 0.001, 1).unwrap();
        assert_ne!(model.trunk_values(), trunk);
    }

    #[test]
    fn weak_source_is_rejected() {
        let data = separable(24, 3, 4, 6);
        let source = Model::new(ModelSpec::new(Architecture::Rgcn, &[Task::Event], 3, 4), &data.adjacency().unwrap()).unwrap();
        let plan = TransferPlan {
            trigger: 1.0,
            ..TransferPlan::default()
        };
        let acc = task_accuracy(&source, &data, Task::Event).unwrap();
        assert!(acc < 1.0);
        assert!(matches!(
            transfer(&source, &plan, Task::Type, &data, &quick(Task::Type, 1)),
            Err(Error::TriggerUnmet { .. })
        ));
    }
}
