//! Accuracy, confusion matrices, ROC/AUC, evaluation reports and
//! robustness sweeps.

mod metrics;
mod predict;
mod report;
mod sweep;

pub use metrics::{accuracy, confusion, roc_auc, ConfusionMatrix, RocResult};
pub use predict::{batch_features, predict, task_accuracy, Predictions, TaskExamples};
pub use report::{evaluate, ClassMargin, Report, RocSummary};
pub use sweep::{robustness_sweep, SweepCondition, SweepRow, SweepTable};
