use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gridfault::dataset::Task;
use gridfault::experiment::{
    run_evaluate, run_generate, run_sweep, run_train, run_transfer, ExperimentConfig, SweepAxis,
};
use gridfault::layers::Architecture;
use gridfault::Error;

#[derive(Parser)]
#[command(name = "gridfault", version, about = "Graph-based fault diagnosis for distribution networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Preset name (potsdam-desk, potsdam-full, ieee123-desk, ieee123-full) or config file.
    #[arg(long, default_value = "potsdam-desk")]
    config: String,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sets every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    arch: Option<Architecture>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the scenario grid and write train/test datasets.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated measured bus names.
        #[arg(long, value_delimiter = ',')]
        measured: Option<Vec<String>>,
        /// Measurement SNR in dB (`inf` for none).
        #[arg(long)]
        snr: Option<String>,
    },
    /// Train one task from scratch.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        task: Option<Task>,
    },
    /// Transfer the event trunk to the other tasks and fine-tune.
    Transfer {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Score checkpoints on the test set and write reports.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        arch: Option<Architecture>,
        /// Tasks to evaluate (repeatable); all four by default.
        #[arg(long)]
        task: Vec<Task>,
    },
    /// Regenerate, retrain and score per condition, e.g. `snr=inf,30,25,20`.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        sweep: String,
        /// Tasks to train per condition (repeatable).
        #[arg(long)]
        task: Vec<Task>,
    },
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&common.config).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.set_seed(seed);
    }
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(cfg)
}

fn apply_model(cfg: &mut ExperimentConfig, m: &ModelArgs) {
    if let Some(a) = m.arch {
        cfg.model.architecture = a;
    }
    if let Some(e) = m.epochs {
        cfg.train.epochs = e;
        cfg.sweep.epochs = Some(e);
    }
}

fn validated(cfg: ExperimentConfig) -> Result<ExperimentConfig, Failure> {
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    println!("effective config:\n{}", cfg.to_json()?);
    Ok(cfg)
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { common, measured, snr } => {
            let mut cfg = load(&common)?;
            if measured.is_some() {
                cfg.dataset.measured = measured;
            }
            if let Some(s) = snr {
                cfg.dataset.snr_db = match s.as_str() {
                    "inf" => None,
                    v => Some(v.parse().map_err(|_| Failure::Usage(format!("invalid --snr `{v}`")))?),
                };
            }
            let cfg = validated(cfg)?;
            let s = run_generate(&cfg)?;
            for (name, c) in [("train", &s.train), ("test", &s.test)] {
                println!(
                    "{name}: {} samples ({} fault, {} non-fault); NF/LG/LL/LLG/3L/3LG = {:?}",
                    c.samples, c.fault, c.non_fault, c.types
                );
            }
            for f in &s.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Train { common, model, task } => {
            let mut cfg = load(&common)?;
            apply_model(&mut cfg, &model);
            if let Some(t) = task {
                cfg.train.task = t;
            }
            let cfg = validated(cfg)?;
            let s = run_train(&cfg)?;
            if let Some(r) = s.history.last() {
                let holdout = r.holdout_accuracy.map(pct).unwrap_or_default();
                println!("epoch {}: loss {:.4}, train {}, test {holdout}", r.epoch, r.loss, pct(r.accuracy));
            }
            println!("wrote {} and {}", s.checkpoint.display(), s.history_path.display());
        }
        Command::Transfer { common, model } => {
            let mut cfg = load(&common)?;
            apply_model(&mut cfg, &model);
            let cfg = validated(cfg)?;
            let log = run_transfer(&cfg)?;
            println!("source event accuracy {} (trigger {})", pct(log.source_accuracy), pct(log.trigger));
            for s in &log.stages {
                println!(
                    "{}: trunk identical to source = {}; head {}, fine-tuned at lr {} {}; wrote {}",
                    s.task,
                    s.trunk_identical,
                    pct(s.head_accuracy),
                    s.fine_tune_lr,
                    pct(s.fine_tuned_accuracy),
                    s.checkpoint.display()
                );
            }
        }
        Command::Evaluate { common, arch, task } => {
            let mut cfg = load(&common)?;
            if let Some(a) = arch {
                cfg.model.architecture = a;
            }
            let tasks = if task.is_empty() { Task::ALL.to_vec() } else { task };
            let cfg = validated(cfg)?;
            for r in run_evaluate(&cfg, &tasks)? {
                let auc = r.roc.as_ref().map(|a| format!(", AUC {:.4}", a.auc)).unwrap_or_default();
                println!("{} {}: accuracy {} on {} samples{auc}", r.architecture, r.task, pct(r.accuracy), r.n_samples);
            }
        }
        Command::Sweep { common, model, sweep, task } => {
            let mut cfg = load(&common)?;
            apply_model(&mut cfg, &model);
            if !task.is_empty() {
                cfg.sweep.tasks = task;
            }
            let axis = SweepAxis::parse(&sweep).map_err(|e| Failure::Usage(e.to_string()))?;
            let cfg = validated(cfg)?;
            let outcome = run_sweep(&cfg, &axis)?;
            for r in &outcome.table.rows {
                println!("{}={} {}: {}", r.axis, r.value, r.task, pct(r.accuracy));
            }
            for (b, t) in &outcome.relative_time {
                println!("batch {b}: relative time {t:.3}");
            }
            println!("wrote {}", outcome.path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
