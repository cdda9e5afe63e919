//! Builds a small labeled window dataset, splits it, and writes it to disk.
//!
//! cargo run --example generate_dataset [out dir]

use gridfault::dataset::{
    generate_dataset, load_dataset, save_dataset, split, GenerationOptions, ScenarioGrid, SplitCounts,
};
use gridfault::grid::bundled_network;
use gridfault::sim::{FaultCategory, FaultType};

fn main() -> gridfault::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "runs/example-dataset".into());
    let net = bundled_network("potsdam13")?;
    let grid = ScenarioGrid {
        categories: FaultCategory::ALL.to_vec(),
        resistances: vec![0.1, 1.0, 10.0],
        fault_buses: (0..net.n_buses()).collect(),
        load_scenarios: 2,
        load_changes: 120,
    };
    println!("{} fault configurations + {} load changes", grid.fault_case_count(), grid.load_changes);

    let opts = GenerationOptions {
        snr_db: Some(30.0),
        seed: 7,
        ..Default::default()
    };
    let data = generate_dataset("potsdam", &net, &grid, &opts)?;
    println!(
        "{} windows of {} samples x {} buses x 3 phases",
        data.len(),
        data.window(),
        data.n_buses()
    );
    for (t, count) in FaultType::ALL.iter().zip(data.type_counts()) {
        println!("  {:>3}: {count}", t.name());
    }

    let counts = SplitCounts {
        train_fault: 686,
        test_fault: 172,
        train_nf: 96,
        test_nf: 24,
    };
    let (train, test) = split(&data, counts, 11)?;
    std::fs::create_dir_all(&out)?;
    let path = std::path::Path::new(&out).join("train.gfds");
    save_dataset(&train, &path)?;
    save_dataset(&test, path.with_file_name("test.gfds"))?;
    let back = load_dataset(&path)?;
    assert_eq!(back.len(), train.len());
    println!("wrote {} ({} train, {} test)", path.display(), train.len(), test.len());
    Ok(())
}
