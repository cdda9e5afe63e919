//! Trains the R-GCN event detector on a reduced Potsdam grid and prints the
//! learning curve with test accuracy.
//!
//! cargo run --release --example train_rgcn [epochs]

use gridfault::dataset::{generate_dataset, split, GenerationOptions, ScenarioGrid, SplitCounts, Task};
use gridfault::eval::task_accuracy;
use gridfault::grid::bundled_network;
use gridfault::layers::{Architecture, Model, ModelSpec};
use gridfault::sim::FaultCategory;
use gridfault::train::{train_with, TrainConfig};

fn main() -> gridfault::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|e| e.parse().ok()).unwrap_or(20);
    let net = bundled_network("potsdam13")?;
    let grid = ScenarioGrid {
        categories: FaultCategory::ALL.to_vec(),
        resistances: vec![0.1, 1.0, 10.0],
        fault_buses: (0..13).collect(),
        load_scenarios: 2,
        load_changes: 300,
    };
    let data = generate_dataset("potsdam", &net, &grid, &GenerationOptions { seed: 1, ..Default::default() })?;
    let counts = SplitCounts {
        train_fault: 686,
        test_fault: 172,
        train_nf: 240,
        test_nf: 60,
    };
    let (train, test) = split(&data, counts, 2)?;

    let spec = ModelSpec::new(Architecture::Rgcn, &[Task::Event], net.n_buses(), data.window());
    let mut model = Model::new(spec, &data.adjacency()?)?;
    println!("R-GCN with {} parameters", model.store.n_values());
    let cfg = TrainConfig {
        task: Task::Event,
        epochs,
        batch_size: 100,
        seed: 3,
        ..Default::default()
    };
    let history = train_with(&mut model, &train, &cfg, Some(&test), |r, _| {
        println!(
            "epoch {:3}  lr {:.3}  loss {:.4}  train {:.3}  test {:.3}",
            r.epoch,
            r.lr,
            r.loss,
            r.accuracy,
            r.holdout_accuracy.unwrap_or(f64::NAN)
        );
        Ok(())
    })?;
    let acc = task_accuracy(&model, &test, Task::Event)?;
    println!("final test accuracy {acc:.4} after {} epochs", history.records.len());
    Ok(())
}
