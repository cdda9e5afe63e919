//! Scores a trained checkpoint on a stored test set and writes the JSON
//! report and ROC table. Run the experiment `generate` and `train` steps
//! first, e.g. `gridfault generate && gridfault train`.
//!
//! cargo run --release --example evaluate_report [run dir] [task]

use std::path::PathBuf;

use gridfault::dataset::{load_dataset, Task};
use gridfault::eval::evaluate;
use gridfault::experiment::Layout;
use gridfault::layers::{Architecture, Model};

fn main() -> gridfault::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let dir = PathBuf::from(args.get(1).cloned().unwrap_or_else(|| "runs/potsdam-desk".into()));
    let task: Task = args.get(2).map(String::as_str).unwrap_or("event").parse()?;
    let layout = Layout::new(&dir);

    let test = load_dataset(layout.test_data())?;
    let model = Model::load(layout.checkpoint(task, Architecture::Rgcn), &test.adjacency()?)?;
    let report = evaluate(&model, &test, task, "potsdam")?;

    println!("{task}: accuracy {:.4} on {} samples", report.accuracy, report.n_samples);
    let names = &report.confusion.class_names;
    println!("confusion (rows true, columns predicted):");
    println!("{:>6} {}", "", names.iter().map(|n| format!("{n:>6}")).collect::<String>());
    for (name, row) in names.iter().zip(&report.confusion.counts) {
        println!("{name:>6} {}", row.iter().map(|c| format!("{c:>6}")).collect::<String>());
    }
    for c in &report.classes {
        let f = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
        println!("  {:>8}: support {:4}, recall {}, precision {}", c.class, c.support, f(c.recall), f(c.precision));
    }
    if let Some(roc) = &report.roc {
        println!("ROC AUC {:.4} over {} points", roc.auc, roc.points);
    }
    for path in report.write(&dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
