use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{GenerationOptions, ScenarioGrid, SplitCounts, Task, WindowSelection};
use crate::error::{Error, Result};
use crate::grid::{resolve_network, NetworkGraph};
use crate::layers::{Architecture, CellType, LayerSizes, ModelSpec, NodePooling};
use crate::sim::{FaultCategory, WaveformParams};
use crate::train::{TrainConfig, TransferPlan};

/// Names of the configs compiled into the crate.
pub const PRESETS: [&str; 4] = ["potsdam-desk", "potsdam-full", "ieee123-desk", "ieee123-full"];

fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "potsdam-desk" => include_str!("../../configs/potsdam-desk.json"),
        "potsdam-full" => include_str!("../../configs/potsdam-full.json"),
        "ieee123-desk" => include_str!("../../configs/ieee123-desk.json"),
        "ieee123-full" => include_str!("../../configs/ieee123-full.json"),
        _ => return None,
    })
}

fn all_categories() -> Vec<FaultCategory> {
    FaultCategory::ALL.to_vec()
}

fn default_resistances() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "all_categories")]
    pub categories: Vec<FaultCategory>,
    #[serde(default = "default_resistances")]
    pub resistances: Vec<f64>,
    /// Fault bus names; `None` faults every bus.
    #[serde(default)]
    pub fault_buses: Option<Vec<String>>,
    pub load_scenarios: usize,
    pub load_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub window: usize,
    pub selection: WindowSelection,
    pub waveform: WaveformParams,
    pub onset_range: (f64, f64),
    /// Measured bus names; `None` measures every bus.
    pub measured: Option<Vec<String>>,
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        let g = GenerationOptions::default();
        Self {
            window: g.window,
            selection: g.selection,
            waveform: g.waveform,
            onset_range: g.onset_range,
            measured: None,
            snr_db: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fault: usize,
    pub test_fault: usize,
    pub train_nf: usize,
    pub test_nf: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SplitConfig {
    pub fn counts(&self) -> SplitCounts {
        SplitCounts {
            train_fault: self.train_fault,
            test_fault: self.test_fault,
            train_nf: self.train_nf,
            test_nf: self.test_nf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub pooling: NodePooling,
    pub cell: CellType,
    /// Overrides the per-architecture layer sizes.
    pub sizes: Option<LayerSizes>,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            architecture: Architecture::Rgcn,
            pooling: NodePooling::Mean,
            cell: CellType::Lstm,
            sizes: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Tasks trained and scored for every condition.
    pub tasks: Vec<Task>,
    /// Epoch budget per condition; `None` uses `train.epochs`.
    pub epochs: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            tasks: vec![Task::Event],
            epochs: None,
        }
    }
}

/// One JSON document describing a whole experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: String,
    /// Bundled network name or path to a network file.
    pub network: String,
    pub grid: GridConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    pub split: SplitConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub transfer: TransferPlan,
    #[serde(default)]
    pub sweep: SweepConfig,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let text = preset_text(name).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown preset `{name}` (available: {})", PRESETS.join(", ")))
        })?;
        Self::from_json(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config file, or a preset when `name_or_path` is not a file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        let path = Path::new(name_or_path);
        if path.is_file() {
            Self::from_json(&std::fs::read_to_string(path)?)
        } else {
            Self::preset(name_or_path)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Sets every seed in the config.
    pub fn set_seed(&mut self, seed: u64) {
        self.dataset.seed = seed;
        self.split.seed = seed;
        self.model.seed = seed;
        self.train.seed = seed;
    }

    pub fn network(&self) -> Result<NetworkGraph> {
        resolve_network(&self.network)
    }

    fn buses(network: &NetworkGraph, names: &Option<Vec<String>>) -> Result<Vec<usize>> {
        match names {
            None => Ok((0..network.n_buses()).collect()),
            Some(names) => network.resolve_buses(names),
        }
    }

    pub fn scenario_grid(&self, network: &NetworkGraph) -> Result<ScenarioGrid> {
        let grid = ScenarioGrid {
            categories: self.grid.categories.clone(),
            resistances: self.grid.resistances.clone(),
            fault_buses: Self::buses(network, &self.grid.fault_buses)?,
            load_scenarios: self.grid.load_scenarios,
            load_changes: self.grid.load_changes,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn generation_options(&self, network: &NetworkGraph) -> Result<GenerationOptions> {
        let measured = match &self.dataset.measured {
            None => None,
            m => Some(Self::buses(network, m)?),
        };
        let opts = GenerationOptions {
            window: self.dataset.window,
            selection: self.dataset.selection,
            waveform: self.dataset.waveform,
            onset_range: self.dataset.onset_range,
            measured,
            snr_db: self.dataset.snr_db,
            seed: self.dataset.seed,
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn model_spec(&self, task: Task, n_buses: usize) -> ModelSpec {
        let mut spec = ModelSpec::new(self.model.architecture, &[task], n_buses, self.dataset.window);
        spec.pooling = self.model.pooling;
        spec.cell = self.model.cell;
        spec.dropout = self.train.dropout;
        spec.seed = self.model.seed;
        if let Some(sizes) = &self.model.sizes {
            spec.sizes = sizes.clone();
        }
        spec
    }

    /// Checks everything that can be checked without generating data.
    pub fn validate(&self) -> Result<()> {
        if self.system.is_empty() || self.system.contains(['/', '\\']) {
            return Err(Error::InvalidArgument(format!("system name `{}`", self.system)));
        }
        let network = self.network()?;
        let grid = self.scenario_grid(&network)?;
        let opts = self.generation_options(&network)?;
        let fault_windows = match opts.selection {
            WindowSelection::All => usize::MAX,
            _ => grid.fault_case_count(),
        };
        let s = &self.split;
        if s.train_fault + s.test_fault > fault_windows {
            return Err(Error::InsufficientSamples {
                class: "fault",
                requested: s.train_fault + s.test_fault,
                available: fault_windows,
            });
        }
        if opts.selection != WindowSelection::All && s.train_nf + s.test_nf > grid.load_changes {
            return Err(Error::InsufficientSamples {
                class: "non-fault",
                requested: s.train_nf + s.test_nf,
                available: grid.load_changes,
            });
        }
        self.train.validate()?;
        self.transfer.validate()?;
        for task in Task::ALL {
            self.model_spec(task, network.n_buses()).validate()?;
        }
        if self.sweep.tasks.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one task".into()));
        }
        Ok(())
    }
}
