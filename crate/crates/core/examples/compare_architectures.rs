//! Trains every architecture on the same reduced dataset for one task and
//! prints test accuracy, parameter count and wall time.
//!
//! cargo run --release --example compare_architectures [task] [epochs]

use std::time::Instant;

use gridfault::dataset::{generate_dataset, split, GenerationOptions, ScenarioGrid, SplitCounts, Task};
use gridfault::eval::task_accuracy;
use gridfault::grid::bundled_network;
use gridfault::layers::{Architecture, Model, ModelSpec};
use gridfault::sim::FaultCategory;
use gridfault::train::{train, TrainConfig};

fn main() -> gridfault::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let task: Task = args.get(1).map(String::as_str).unwrap_or("type").parse()?;
    let epochs = args.get(2).and_then(|e| e.parse().ok()).unwrap_or(15);

    let net = bundled_network("potsdam13")?;
    let grid = ScenarioGrid {
        categories: FaultCategory::ALL.to_vec(),
        resistances: vec![0.1, 1.0, 10.0],
        fault_buses: (0..13).collect(),
        load_scenarios: 2,
        load_changes: 200,
    };
    let data = generate_dataset("potsdam", &net, &grid, &GenerationOptions { seed: 9, ..Default::default() })?;
    let counts = SplitCounts {
        train_fault: 686,
        test_fault: 172,
        train_nf: 160,
        test_nf: 40,
    };
    let (train_set, test_set) = split(&data, counts, 10)?;
    let adjacency = data.adjacency()?;

    println!("{task}, {epochs} epochs");
    for arch in Architecture::ALL {
        let start = Instant::now();
        let mut model = Model::new(ModelSpec::new(arch, &[task], 13, 20), &adjacency)?;
        let cfg = TrainConfig {
            task,
            epochs,
            batch_size: 100,
            seed: 12,
            ..Default::default()
        };
        train(&mut model, &train_set, &cfg)?;
        println!(
            "  {:>5}: accuracy {:.4}, {:7} parameters, {:.1}s",
            arch.name(),
            task_accuracy(&model, &test_set, task)?,
            model.store.n_values(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
