//! Regenerates and retrains a reduced experiment per noise level and per
//! measured-bus set, then prints the accuracy tables.
//!
//! cargo run --release --example robustness_sweep [epochs]

use gridfault::experiment::{run_sweep, ExperimentConfig, SweepAxis};

fn main() -> gridfault::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|e| e.parse().ok()).unwrap_or(15);
    let mut cfg = ExperimentConfig::preset("potsdam-desk")?;
    cfg.grid.load_scenarios = 2;
    cfg.grid.load_changes = 200;
    cfg.split.train_fault = 686;
    cfg.split.test_fault = 172;
    cfg.split.train_nf = 160;
    cfg.split.test_nf = 40;
    cfg.sweep.epochs = Some(epochs);
    cfg.out = "runs/example-sweep".into();

    for axis in ["snr=inf,30,20,10", "measured=all;1,5,9;1"] {
        let outcome = run_sweep(&cfg, &SweepAxis::parse(axis)?)?;
        println!("{axis}");
        for row in &outcome.table.rows {
            println!("  {:>10}  {:>6}  {:.4}", row.value, row.task, row.accuracy);
        }
        println!("  wrote {}", outcome.path.display());
    }
    Ok(())
}
