//! Trains an event detector, then reuses its frozen trunk for fault type
//! classification and fine-tunes the whole network at a small learning rate.
//!
//! cargo run --release --example transfer_learning

use gridfault::dataset::{generate_dataset, split, GenerationOptions, ScenarioGrid, SplitCounts, Task};
use gridfault::eval::task_accuracy;
use gridfault::grid::bundled_network;
use gridfault::layers::{Architecture, Model, ModelSpec};
use gridfault::sim::FaultCategory;
use gridfault::train::{fine_tune, train, transfer, TrainConfig, TransferPlan};

fn main() -> gridfault::Result<()> {
    let net = bundled_network("potsdam13")?;
    let grid = ScenarioGrid {
        categories: FaultCategory::ALL.to_vec(),
        resistances: vec![0.1, 1.0, 10.0],
        fault_buses: (0..13).collect(),
        load_scenarios: 2,
        load_changes: 200,
    };
    let data = generate_dataset("potsdam", &net, &grid, &GenerationOptions { seed: 5, ..Default::default() })?;
    let counts = SplitCounts {
        train_fault: 686,
        test_fault: 172,
        train_nf: 160,
        test_nf: 40,
    };
    let (train_set, test_set) = split(&data, counts, 6)?;
    let adjacency = data.adjacency()?;

    let base = TrainConfig {
        task: Task::Event,
        epochs: 25,
        batch_size: 100,
        seed: 8,
        ..Default::default()
    };
    let mut source = Model::new(ModelSpec::new(Architecture::Rgcn, &[Task::Event], 13, 20), &adjacency)?;
    train(&mut source, &train_set, &base)?;
    println!("event model: test accuracy {:.4}", task_accuracy(&source, &test_set, Task::Event)?);

    let plan = TransferPlan {
        head_epochs: 15,
        ..Default::default()
    };
    let type_cfg = TrainConfig { task: Task::Type, ..base.clone() };
    let (mut model, _) = transfer(&source, &plan, Task::Type, &train_set, &type_cfg)?;
    let same = model
        .trunk_values()
        .iter()
        .zip(source.trunk_values())
        .all(|((_, a), (_, b))| a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    println!(
        "type head on frozen trunk: test accuracy {:.4}, trunk unchanged = {same}",
        task_accuracy(&model, &test_set, Task::Type)?
    );

    fine_tune(&mut model, &train_set, &type_cfg, plan.fine_tune_lr, 15)?;
    println!(
        "after fine-tuning all layers at lr {}: test accuracy {:.4}, frozen parameters left = {}",
        plan.fine_tune_lr,
        task_accuracy(&model, &test_set, Task::Type)?,
        model.store.any_frozen()
    );
    Ok(())
}
