//! Runs the whole experiment flow from a preset with reduced sizes:
//! generate, train the event task, transfer to the other tasks, evaluate.
//!
//! cargo run --release --example experiment_pipeline [preset]

use gridfault::dataset::Task;
use gridfault::experiment::{run_evaluate, run_generate, run_train, run_transfer, ExperimentConfig, PRESETS};

fn main() -> gridfault::Result<()> {
    let preset = std::env::args().nth(1).unwrap_or_else(|| "potsdam-desk".into());
    println!("presets: {}", PRESETS.join(", "));
    let mut cfg = ExperimentConfig::preset(&preset)?;
    let network = cfg.network()?;
    let full = cfg.scenario_grid(&network)?.fault_case_count();
    println!("{preset}: {} buses, {full} fault configurations at full size", network.n_buses());

    // shrink to a quick run: one load scenario, short schedules
    cfg.grid.load_scenarios = 1;
    cfg.grid.load_changes = 100;
    let faults = cfg.scenario_grid(&network)?.fault_case_count();
    cfg.split.test_fault = faults / 5;
    cfg.split.train_fault = faults - faults / 5;
    cfg.split.train_nf = 80;
    cfg.split.test_nf = 20;
    cfg.train.epochs = 10;
    cfg.train.batch_size = 100;
    cfg.transfer.trigger = 0.8;
    cfg.transfer.head_epochs = 5;
    cfg.transfer.fine_tune_epochs = 5;
    cfg.out = format!("runs/example-{preset}").into();

    let g = run_generate(&cfg)?;
    println!("train {} samples, test {} samples", g.train.samples, g.test.samples);
    let t = run_train(&cfg)?;
    println!("event training loss {:.4}", t.history.last().map(|r| r.loss).unwrap_or(f64::NAN));
    let log = run_transfer(&cfg)?;
    for s in &log.stages {
        println!("transfer to {}: trunk kept = {}, fine-tuned train accuracy {:.4}", s.task, s.trunk_identical, s.fine_tuned_accuracy);
    }
    for r in run_evaluate(&cfg, &Task::ALL)? {
        println!("{}: test accuracy {:.4}", r.task, r.accuracy);
    }
    println!("outputs in {}", cfg.out.display());
    Ok(())
}
