//! Config-driven experiments wiring generation, training, transfer,
//! evaluation and sweeps, with every output written under one directory.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{DatasetConfig, ExperimentConfig, GridConfig, ModelConfig, SplitConfig, SweepConfig, PRESETS};

use crate::dataset::{generate_dataset, load_dataset, save_dataset, split, Dataset, Task};
use crate::error::{Error, Result};
use crate::eval::{evaluate, robustness_sweep, task_accuracy, Report, SweepCondition, SweepTable};
use crate::layers::{Architecture, Model};
use crate::train::{fine_tune, train, train_with, transfer, EpochRecord, History, TrainConfig};

/// File names inside an experiment's output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub dir: PathBuf,
}

impl Layout {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.dir.join("config.json")
    }

    pub fn train_data(&self) -> PathBuf {
        self.dir.join("train.gfds")
    }

    pub fn test_data(&self) -> PathBuf {
        self.dir.join("test.gfds")
    }

    /// Final model for a task; for transferred tasks this is the fine-tuned one.
    pub fn checkpoint(&self, task: Task, arch: Architecture) -> PathBuf {
        self.dir.join(format!("model_{task}_{arch}.gfck"))
    }

    pub fn frozen_checkpoint(&self, task: Task, arch: Architecture) -> PathBuf {
        self.dir.join(format!("model_{task}_{arch}_frozen.gfck"))
    }

    pub fn epoch_checkpoint(&self, task: Task, arch: Architecture, epoch: usize) -> PathBuf {
        self.dir.join(format!("model_{task}_{arch}_e{epoch:04}.gfck"))
    }

    pub fn history(&self, task: Task, arch: Architecture, stage: &str) -> PathBuf {
        let suffix = if stage.is_empty() { String::new() } else { format!("_{stage}") };
        self.dir.join(format!("history_{task}_{arch}{suffix}.csv"))
    }

    pub fn transfer_log(&self, arch: Architecture) -> PathBuf {
        self.dir.join(format!("transfer_{arch}.json"))
    }

    pub fn sweep_table(&self, axis: &str, arch: Architecture) -> PathBuf {
        self.dir.join(format!("sweep_{axis}_{arch}.csv"))
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<Layout> {
    cfg.validate()?;
    let layout = Layout::new(&cfg.out);
    fs::create_dir_all(&layout.dir)?;
    fs::write(layout.config(), cfg.to_json()?)?;
    Ok(layout)
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("missing {what} `{}`", path.display())))
    }
}

fn generate_split(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let network = cfg.network()?;
    let grid = cfg.scenario_grid(&network)?;
    let opts = cfg.generation_options(&network)?;
    let data = generate_dataset(&cfg.system, &network, &grid, &opts)?;
    split(&data, cfg.split.counts(), cfg.split.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub samples: usize,
    pub fault: usize,
    pub non_fault: usize,
    /// Per fault type, in label order (NF, LG, LL, LLG, 3L, 3LG).
    pub types: [usize; 6],
}

impl ClassCounts {
    pub fn of(d: &Dataset) -> Self {
        let (fault, non_fault) = d.event_counts();
        Self {
            samples: d.len(),
            fault,
            non_fault,
            types: d.type_counts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub train: ClassCounts,
    pub test: ClassCounts,
    pub files: Vec<PathBuf>,
}

/// Generates, splits and writes the train and test datasets.
pub fn run_generate(cfg: &ExperimentConfig) -> Result<GenerateSummary> {
    let layout = prepare(cfg)?;
    let (train_set, test_set) = generate_split(cfg)?;
    save_dataset(&train_set, layout.train_data())?;
    save_dataset(&test_set, layout.test_data())?;
    Ok(GenerateSummary {
        train: ClassCounts::of(&train_set),
        test: ClassCounts::of(&test_set),
        files: vec![layout.train_data(), layout.test_data()],
    })
}

fn load_split(layout: &Layout) -> Result<(Dataset, Dataset)> {
    require(&layout.train_data(), "train dataset")?;
    require(&layout.test_data(), "test dataset")?;
    Ok((load_dataset(layout.train_data())?, load_dataset(layout.test_data())?))
}

fn check_geometry(cfg: &ExperimentConfig, d: &Dataset) -> Result<()> {
    if d.window() != cfg.dataset.window {
        return Err(Error::shape("dataset window", &[d.window()], &[cfg.dataset.window]));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub checkpoint: PathBuf,
    pub history_path: PathBuf,
    pub history: History,
}

/// Trains `cfg.train.task` from scratch on the stored train set, scoring
/// the test set after every epoch.
pub fn run_train(cfg: &ExperimentConfig) -> Result<TrainSummary> {
    let layout = prepare(cfg)?;
    let (train_set, test_set) = load_split(&layout)?;
    check_geometry(cfg, &train_set)?;
    let task = cfg.train.task;
    let arch = cfg.model.architecture;
    let mut model = Model::new(cfg.model_spec(task, train_set.n_buses()), &train_set.adjacency()?)?;
    let every = cfg.train.checkpoint_every;
    let history = train_with(&mut model, &train_set, &cfg.train, Some(&test_set), |r: &EpochRecord, m| {
        match every {
            Some(k) if (r.epoch + 1) % k == 0 => m.save(layout.epoch_checkpoint(task, arch, r.epoch + 1)),
            _ => Ok(()),
        }
    })?;
    let checkpoint = layout.checkpoint(task, arch);
    model.save(&checkpoint)?;
    let history_path = layout.history(task, arch, "");
    history.write_csv(&history_path)?;
    Ok(TrainSummary {
        checkpoint,
        history_path,
        history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferStage {
    pub task: Task,
    pub frozen_checkpoint: PathBuf,
    pub checkpoint: PathBuf,
    /// Trunk of the frozen-stage model equals the source trunk bit for bit.
    pub trunk_identical: bool,
    pub head_accuracy: f64,
    pub fine_tune_lr: f64,
    pub fine_tuned_accuracy: f64,
    pub frozen_after_fine_tune: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferLog {
    pub source: PathBuf,
    pub source_accuracy: f64,
    pub trigger: f64,
    pub stages: Vec<TransferStage>,
}

/// Transfers the event model's trunk to every target task: head training on
/// the frozen trunk, then fine-tuning of all layers.
pub fn run_transfer(cfg: &ExperimentConfig) -> Result<TransferLog> {
    let layout = prepare(cfg)?;
    let arch = cfg.model.architecture;
    let (train_set, _) = load_split(&layout)?;
    check_geometry(cfg, &train_set)?;
    let source_path = layout.checkpoint(Task::Event, arch);
    require(&source_path, "event checkpoint")?;
    let adjacency = train_set.adjacency()?;
    let source = Model::load(&source_path, &adjacency)?;
    let source_accuracy = task_accuracy(&source, &train_set, Task::Event)?;
    let plan = &cfg.transfer;
    crate::train::check_trigger(source_accuracy, plan.trigger)?;

    let mut stages = Vec::new();
    for &task in &plan.targets {
        let tc = TrainConfig { task, ..cfg.train.clone() };
        let (mut model, head_history) = transfer(&source, plan, task, &train_set, &tc)?;
        let frozen_checkpoint = layout.frozen_checkpoint(task, arch);
        model.save(&frozen_checkpoint)?;
        head_history.write_csv(&layout.history(task, arch, "frozen"))?;
        let trunk_identical = bitwise_equal(&model.trunk_values(), &source.trunk_values());
        if !trunk_identical {
            return Err(Error::Task(format!("{task} frozen stage changed the transferred trunk")));
        }
        let head_accuracy = task_accuracy(&model, &train_set, task)?;

        let fine = fine_tune(&mut model, &train_set, &tc, plan.fine_tune_lr, plan.fine_tune_epochs)?;
        let checkpoint = layout.checkpoint(task, arch);
        model.save(&checkpoint)?;
        fine.write_csv(&layout.history(task, arch, "fine"))?;
        stages.push(TransferStage {
            task,
            frozen_checkpoint,
            checkpoint,
            trunk_identical,
            head_accuracy,
            fine_tune_lr: plan.fine_tune_lr,
            fine_tuned_accuracy: task_accuracy(&model, &train_set, task)?,
            frozen_after_fine_tune: model.store.any_frozen(),
        });
    }
    let log = TransferLog {
        source: source_path,
        source_accuracy,
        trigger: plan.trigger,
        stages,
    };
    fs::write(layout.transfer_log(arch), serde_json::to_string_pretty(&log)? + "\n")?;
    Ok(log)
}

fn bitwise_equal(a: &[(String, crate::nn::Tensor)], b: &[(String, crate::nn::Tensor)]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|((na, ta), (nb, tb))| {
            na == nb
                && ta.shape() == tb.shape()
                && ta.data().iter().zip(tb.data()).all(|(x, y)| x.to_bits() == y.to_bits())
        })
}

/// Scores each task's final checkpoint on the stored test set and writes
/// `report_<system>_<task>_<arch>.json` files.
pub fn run_evaluate(cfg: &ExperimentConfig, tasks: &[Task]) -> Result<Vec<Report>> {
    let layout = prepare(cfg)?;
    let arch = cfg.model.architecture;
    let (_, test_set) = load_split(&layout)?;
    check_geometry(cfg, &test_set)?;
    let adjacency = test_set.adjacency()?;
    let mut reports = Vec::new();
    for &task in tasks {
        let path = layout.checkpoint(task, arch);
        require(&path, "checkpoint")?;
        let model = Model::load(&path, &adjacency)?;
        let report = evaluate(&model, &test_set, task, &cfg.system)?;
        report.write(&layout.dir)?;
        reports.push(report);
    }
    Ok(reports)
}

/// The varied quantity of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// SNR levels in dB; `None` is noise-free.
    Snr(Vec<Option<f64>>),
    /// Measured bus-name sets; `None` measures all buses.
    Measured(Vec<Option<Vec<String>>>),
    /// Minibatch sizes, timed.
    BatchSize(Vec<usize>),
}

impl SweepAxis {
    /// Parses `snr=inf,30,25,20`, `measured=all;1,5,9` or `batch=50,250`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("sweep `{text}`: expected snr=…, measured=… or batch=…"));
        let (axis, values) = text.split_once('=').ok_or_else(bad)?;
        if values.trim().is_empty() {
            return Err(bad());
        }
        match axis.trim() {
            "snr" => values
                .split(',')
                .map(|v| match v.trim() {
                    "inf" => Ok(None),
                    v => v.parse::<f64>().ok().filter(|x| x.is_finite()).map(Some).ok_or_else(bad),
                })
                .collect::<Result<_>>()
                .map(SweepAxis::Snr),
            "measured" => Ok(SweepAxis::Measured(
                values
                    .split(';')
                    .map(|set| match set.trim() {
                        "all" => None,
                        s => Some(s.split(',').map(|b| b.trim().to_string()).collect()),
                    })
                    .collect(),
            )),
            "batch" => values
                .split(',')
                .map(|v| v.trim().parse::<usize>().ok().filter(|&b| b > 0).ok_or_else(bad))
                .collect::<Result<_>>()
                .map(SweepAxis::BatchSize),
            _ => Err(bad()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Snr(_) => "snr",
            SweepAxis::Measured(_) => "measured",
            SweepAxis::BatchSize(_) => "batch",
        }
    }
}

/// Per-condition accuracies for the robustness axes. The batch axis also
/// records wall-clock seconds relative to the first batch size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub table: SweepTable,
    pub relative_time: Vec<(usize, f64)>,
    pub path: PathBuf,
}

fn sweep_pipeline(cfg: &ExperimentConfig) -> Result<Vec<(Task, f64)>> {
    let (train_set, test_set) = generate_split(cfg)?;
    let adjacency = train_set.adjacency()?;
    cfg.sweep
        .tasks
        .iter()
        .map(|&task| {
            let tc = TrainConfig {
                task,
                epochs: cfg.sweep.epochs.unwrap_or(cfg.train.epochs),
                ..cfg.train.clone()
            };
            let mut model = Model::new(cfg.model_spec(task, train_set.n_buses()), &adjacency)?;
            train(&mut model, &train_set, &tc)?;
            Ok((task, task_accuracy(&model, &test_set, task)?))
        })
        .collect()
}

/// Regenerates, retrains and re-scores the experiment once per axis value.
pub fn run_sweep(cfg: &ExperimentConfig, axis: &SweepAxis) -> Result<SweepOutcome> {
    let layout = prepare(cfg)?;
    let network = cfg.network()?;
    let path = layout.sweep_table(axis.name(), cfg.model.architecture);
    let (table, relative_time) = match axis {
        SweepAxis::Snr(levels) => {
            let conditions: Vec<_> = levels.iter().map(|&l| SweepCondition::Snr(l)).collect();
            let table = robustness_sweep(&conditions, |c| {
                let SweepCondition::Snr(level) = c else { unreachable!() };
                let mut run = cfg.clone();
                run.dataset.snr_db = *level;
                sweep_pipeline(&run)
            })?;
            (table, Vec::new())
        }
        SweepAxis::Measured(sets) => {
            let conditions = sets
                .iter()
                .map(|s| {
                    Ok(SweepCondition::Measured(match s {
                        None => None,
                        Some(names) => Some(network.resolve_buses(names)?),
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            let table = robustness_sweep(&conditions, |c| {
                let SweepCondition::Measured(buses) = c else { unreachable!() };
                let mut run = cfg.clone();
                run.dataset.measured = buses
                    .as_ref()
                    .map(|b| b.iter().map(|&i| network.buses()[i].name.clone()).collect());
                sweep_pipeline(&run)
            })?;
            (table, Vec::new())
        }
        SweepAxis::BatchSize(sizes) => {
            let mut times = Vec::new();
            let mut rows = Vec::new();
            for &b in sizes {
                let mut run = cfg.clone();
                run.train.batch_size = b;
                let start = Instant::now();
                let accuracies = sweep_pipeline(&run)?;
                times.push((b, start.elapsed().as_secs_f64()));
                rows.push((b, accuracies));
            }
            let base = times[0].1.max(f64::MIN_POSITIVE);
            let relative: Vec<_> = times.iter().map(|&(b, t)| (b, t / base)).collect();
            let mut table = SweepTable::default();
            for (b, accuracies) in rows {
                for (task, accuracy) in accuracies {
                    table.rows.push(crate::eval::SweepRow {
                        axis: "batch".into(),
                        value: b.to_string(),
                        task,
                        accuracy,
                    });
                }
            }
            (table, relative)
        }
    };
    if relative_time.is_empty() {
        table.write_csv(&path)?;
    } else {
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["axis", "value", "task", "accuracy", "relative_time"])?;
        for r in &table.rows {
            let rel = relative_time.iter().find(|(b, _)| b.to_string() == r.value).map(|x| x.1).unwrap_or(f64::NAN);
            w.write_record([r.axis.clone(), r.value.clone(), r.task.to_string(), format!("{:.6}", r.accuracy), format!("{rel:.3}")])?;
        }
        w.flush()?;
    }
    Ok(SweepOutcome {
        table,
        relative_time,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_specs_parse() {
        assert_eq!(
            SweepAxis::parse("snr=inf,30,25,20").unwrap(),
            SweepAxis::Snr(vec![None, Some(30.0), Some(25.0), Some(20.0)])
        );
        assert_eq!(
            SweepAxis::parse("measured=all;1,5,9").unwrap(),
            SweepAxis::Measured(vec![None, Some(vec!["1".into(), "5".into(), "9".into()])])
        );
        assert_eq!(SweepAxis::parse("batch=50,250").unwrap(), SweepAxis::BatchSize(vec![50, 250]));
        for bad in ["snr", "snr=", "snr=loud", "batch=0", "depth=3"] {
            assert!(SweepAxis::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn layout_names() {
        let l = Layout::new("out");
        assert_eq!(l.checkpoint(Task::Type, Architecture::Rgcn), Path::new("out/model_type_rgcn.gfck"));
        assert_eq!(l.history(Task::Event, Architecture::Ann, ""), Path::new("out/history_event_ann.csv"));
        assert_eq!(l.history(Task::Phase, Architecture::Rgcn, "fine"), Path::new("out/history_phase_rgcn_fine.csv"));
    }

    #[test]
    fn missing_artifacts_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::preset("potsdam-desk").unwrap();
        cfg.out = dir.path().join("run");
        match run_train(&cfg) {
            Err(Error::InvalidArgument(m)) => assert!(m.contains("train dataset")),
            other => panic!("{other:?}"),
        }
    }
}
