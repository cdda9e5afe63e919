//! Scenario grids, windowed graph samples, labels, noise and masking, splits,
//! and the on-disk dataset format.

mod build;
mod io;
mod labels;
mod noise;
mod scenario;
mod split;
mod window;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{AdjacencyMatrix, AdjacencyMode, SquareMatrix, PHASES};
use crate::sim::WaveformParams;

pub use build::{generate_dataset, GenerationOptions};
pub use io::{load_dataset, metadata_path, save_dataset, HEADER_BYTES, LABEL_BYTES, MAGIC, VERSION};
pub use labels::{label, Labels, Task};
pub use noise::{add_noise, apply_noise, mask_measurements, apply_mask};
pub use scenario::{derive_seed, enumerate_scenarios, FaultCase, LoadChangeCase, ScenarioGrid, Scenarios};
pub use split::{split, split_indices, SplitCounts};
pub use window::{window, Window, WindowSelection};

/// One graph sample: per-unit voltages `N x 3 x K` (bus-major, phase-major,
/// time-minor) and its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f32>,
    pub labels: Labels,
}

impl Sample {
    pub fn node_row(&self, bus: usize, window: usize) -> &[f32] {
        let w = PHASES * window;
        &self.features[bus * w..(bus + 1) * w]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub system: String,
    pub network: String,
    pub bus_names: Vec<String>,
    pub n_buses: usize,
    pub window: usize,
    pub n_samples: usize,
    /// Node indices with voltage measurements; other rows are zero.
    pub measured_buses: Vec<usize>,
    pub seed: u64,
    pub snr_db: Option<f64>,
    pub selection: WindowSelection,
    pub waveform: WaveformParams,
    /// Binary (or weighted) adjacency, row by row.
    pub adjacency: Vec<Vec<f64>>,
    #[serde(default)]
    pub grid: Option<ScenarioGrid>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn n_buses(&self) -> usize {
        self.meta.n_buses
    }

    pub fn window(&self) -> usize {
        self.meta.window
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_len(&self) -> usize {
        self.meta.n_buses * PHASES * self.meta.window
    }

    /// Builds a dataset sharing `meta` (with the sample count updated).
    pub fn with_samples(&self, samples: Vec<Sample>) -> Dataset {
        let mut meta = self.meta.clone();
        meta.n_samples = samples.len();
        Dataset { meta, samples }
    }

    /// The graph stored in the metadata.
    pub fn adjacency(&self) -> Result<AdjacencyMatrix> {
        let m = SquareMatrix::from_rows(&self.meta.adjacency)?;
        let binary = m.as_slice().iter().all(|&a| a == 0.0 || a == 1.0);
        let mode = if binary { AdjacencyMode::Binary } else { AdjacencyMode::AdmittanceWeighted };
        AdjacencyMatrix::from_matrix(m, mode)
    }

    /// Counts of (fault, non-fault) samples by the event label.
    pub fn event_counts(&self) -> (usize, usize) {
        let faults = self.samples.iter().filter(|s| s.labels.event).count();
        (faults, self.samples.len() - faults)
    }

    /// Number of samples per fault type, in label order.
    pub fn type_counts(&self) -> [usize; 6] {
        let mut counts = [0; 6];
        for s in &self.samples {
            counts[s.labels.fault_type.index()] += 1;
        }
        counts
    }
}
