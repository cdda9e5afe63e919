use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Task;
use crate::error::{Error, Result};

/// One robustness condition: a noise level or a measured-bus subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCondition {
    /// `None` is the noise-free baseline.
    Snr(Option<f64>),
    /// 0-based measured node indices; `None` measures every bus.
    Measured(Option<Vec<usize>>),
}

impl SweepCondition {
    pub fn axis(&self) -> &'static str {
        match self {
            SweepCondition::Snr(_) => "snr",
            SweepCondition::Measured(_) => "measured",
        }
    }

    /// Label used in tables; bus lists are printed 1-based.
    pub fn label(&self) -> String {
        match self {
            SweepCondition::Snr(None) => "inf".into(),
            SweepCondition::Snr(Some(db)) => format!("{db}"),
            SweepCondition::Measured(None) => "all".into(),
            SweepCondition::Measured(Some(buses)) => buses
                .iter()
                .map(|b| (b + 1).to_string())
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub task: Task,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn accuracy(&self, value: &str, task: Task) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.task == task)
            .map(|r| r.accuracy)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["axis", "value", "task", "accuracy"])?;
        for r in &self.rows {
            w.write_record([r.axis.clone(), r.value.clone(), r.task.to_string(), format!("{:.6}", r.accuracy)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `pipeline` once per condition (each run regenerates, trains and
/// evaluates) and tabulates the per-task accuracies it returns.
pub fn robustness_sweep<F>(conditions: &[SweepCondition], mut pipeline: F) -> Result<SweepTable>
where
    F: FnMut(&SweepCondition) -> Result<Vec<(Task, f64)>>,
{
    if conditions.is_empty() {
        return Err(Error::Empty("sweep conditions"));
    }
    let mut table = SweepTable::default();
    for c in conditions {
        for (task, accuracy) in pipeline(c)? {
            table.rows.push(SweepRow {
                axis: c.axis().to_string(),
                value: c.label(),
                task,
                accuracy,
            });
        }
    }
    Ok(table)
}
