use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{confusion, predict, roc_auc, ConfusionMatrix, RocResult};
use crate::dataset::{Dataset, Task};
use crate::error::Result;
use crate::layers::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMargin {
    pub class: String,
    pub support: u64,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocSummary {
    pub auc: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub system: String,
    pub task: Task,
    pub architecture: String,
    pub n_samples: usize,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub classes: Vec<ClassMargin>,
    pub roc: Option<RocSummary>,
    #[serde(skip)]
    pub roc_curve: Option<RocResult>,
}

/// Full-pass, dropout-free evaluation of one task.
pub fn evaluate(model: &Model, dataset: &Dataset, task: Task, system: &str) -> Result<Report> {
    let p = predict(model, dataset, task)?;
    let names = task.class_names(&dataset.meta.bus_names);
    let c = confusion(&p.predicted, &p.examples.targets, &names)?;
    let classes = names
        .iter()
        .enumerate()
        .map(|(i, n)| ClassMargin {
            class: n.clone(),
            support: c.row_total(i),
            recall: c.recall()[i],
            precision: c.precision()[i],
        })
        .collect();
    let roc_curve = if task == Task::Event {
        let scores: Vec<f64> = p.probabilities.iter().map(|r| r[0]).collect();
        let labels: Vec<bool> = p.examples.targets.iter().map(|&t| t == 1).collect();
        roc_auc(&scores, &labels).ok()
    } else {
        None
    };
    Ok(Report {
        system: system.to_string(),
        task,
        architecture: model.architecture().to_string(),
        n_samples: p.examples.len(),
        accuracy: c.accuracy(),
        roc: roc_curve.as_ref().map(|r| RocSummary {
            auc: r.auc,
            points: r.tpr.len(),
        }),
        confusion: c,
        classes,
        roc_curve,
    })
}

impl Report {
    pub fn file_stem(&self) -> String {
        format!("report_{}_{}_{}", self.system, self.task, self.architecture)
    }

    /// Writes `report_<system>_<task>_<arch>.json`, plus a ROC point CSV for
    /// the event task. Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.file_stem()));
        fs::write(&json, serde_json::to_string_pretty(self)? + "\n")?;
        let mut written = vec![json];
        if let Some(r) = &self.roc_curve {
            let path = dir.join(format!("{}_roc.csv", self.file_stem()));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["threshold", "fpr", "tpr"])?;
            for i in 0..r.tpr.len() {
                let t = if r.thresholds[i].is_finite() {
                    r.thresholds[i].to_string()
                } else {
                    "inf".to_string()
                };
                w.write_record([t, r.fpr[i].to_string(), r.tpr[i].to_string()])?;
            }
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}
