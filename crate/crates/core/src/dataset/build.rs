use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::window::{random_index, spanning_index};
use super::{apply_mask, apply_noise, derive_seed, enumerate_scenarios, label, Dataset, DatasetMeta, Sample};
use super::{ScenarioGrid, WindowSelection};
use crate::error::{Error, Result};
use crate::grid::{build_adjacency, AdjacencyMode, NetworkGraph, PHASES};
use crate::sim::{solve_phasors, synthesize_span, LoadScenario, PhasorSolution, WaveformParams};

const TAG_WINDOW: u64 = 0x5749_4e44;
const TAG_NOISE_STREAM: u64 = 0x534e_5253;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationOptions {
    /// Window length K in samples.
    pub window: usize,
    /// Window choice for fault records; load-change records always use a
    /// random window unless this is `All`.
    pub selection: WindowSelection,
    pub waveform: WaveformParams,
    /// Onset interval in seconds.
    pub onset_range: (f64, f64),
    /// Measured node indices (0-based); `None` measures every bus.
    pub measured: Option<Vec<usize>>,
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self {
            window: 20,
            selection: WindowSelection::FaultSpanning,
            waveform: WaveformParams::default(),
            onset_range: (0.3, 0.7),
            measured: None,
            snr_db: None,
            seed: 0,
        }
    }
}

impl GenerationOptions {
    pub fn validate(&self) -> Result<()> {
        self.waveform.validate()?;
        let t = self.waveform.n_samples();
        if self.window == 0 || self.window > t {
            return Err(Error::InvalidArgument(format!(
                "window length {} does not fit {t} samples",
                self.window
            )));
        }
        let (lo, hi) = self.onset_range;
        if !(lo > 0.0 && lo < hi && hi < self.waveform.duration) {
            return Err(Error::InvalidArgument(format!(
                "onset range ({lo}, {hi}) must lie inside (0, {})",
                self.waveform.duration
            )));
        }
        if matches!(&self.measured, Some(m) if m.is_empty()) {
            return Err(Error::InvalidArgument("at least one measured bus is required".into()));
        }
        if matches!(self.snr_db, Some(s) if s.is_nan()) {
            return Err(Error::InvalidArgument("SNR must not be NaN".into()));
        }
        Ok(())
    }
}

fn onset_index(params: &WaveformParams, onset: f64) -> usize {
    (0..params.n_samples())
        .find(|&k| params.time(k) >= onset)
        .unwrap_or(params.n_samples())
}

fn starts(selection: WindowSelection, k: usize, n_windows: usize, onset_idx: usize, seed: u64) -> Vec<usize> {
    match selection {
        WindowSelection::All => (0..n_windows).map(|j| j * k).collect(),
        WindowSelection::FaultSpanning => vec![spanning_index(onset_idx, k, n_windows) * k],
        WindowSelection::Random => vec![random_index(derive_seed(seed, &[TAG_WINDOW]), n_windows) * k],
    }
}

/// Divides every trace by its bus's peak phase voltage.
fn per_unit(raw: Vec<f64>, base: &[f64], k: usize) -> Vec<f32> {
    raw.chunks_exact(PHASES * k)
        .zip(base)
        .flat_map(|(row, &b)| row.iter().map(move |&x| (x / b) as f32))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn windows_of(
    pre: &PhasorSolution,
    post: &PhasorSolution,
    onset: f64,
    fault: Option<&crate::sim::FaultSpec>,
    selection: WindowSelection,
    opts: &GenerationOptions,
    base: &[f64],
    seed: u64,
) -> Result<Vec<Sample>> {
    let params = &opts.waveform;
    let k = opts.window;
    let n_windows = params.n_samples() / k;
    let idx = onset_index(params, onset);
    starts(selection, k, n_windows, idx, seed)
        .into_iter()
        .map(|start| {
            let raw = synthesize_span(&pre.voltages, &post.voltages, onset, params, start, k)?;
            Ok(label(per_unit(raw, base, k), fault, (start, start + k), idx))
        })
        .collect()
}

/// Simulates every scenario of `grid`, windows, labels and scales the
/// records, then applies measurement masking and noise. Fault samples come
/// first in enumeration order, followed by the load-change samples.
pub fn generate_dataset(
    system: &str,
    network: &NetworkGraph,
    grid: &ScenarioGrid,
    opts: &GenerationOptions,
) -> Result<Dataset> {
    opts.validate()?;
    let n = network.n_buses();
    if let Some(&b) = grid.fault_buses.iter().find(|&&b| b >= n) {
        return Err(Error::InvalidArgument(format!("fault bus index {b} outside 0..{n}")));
    }
    let measured = match &opts.measured {
        Some(m) => {
            if let Some(&b) = m.iter().find(|&&b| b >= n) {
                return Err(Error::InvalidArgument(format!("measured bus index {b} outside 0..{n}")));
            }
            let mut m = m.clone();
            m.sort_unstable();
            m.dedup();
            m
        }
        None => (0..n).collect(),
    };
    let adjacency = build_adjacency(network, AdjacencyMode::Binary)?;
    let scenarios = enumerate_scenarios(grid, opts.seed)?;
    let n_loads = network.loads().len();
    let base: Vec<f64> = network.buses().iter().map(|b| b.peak_phase_volts()).collect();

    // Pre-fault operating points are shared by every fault case of a load scenario.
    let mut load_seeds = vec![0; grid.load_scenarios];
    for case in &scenarios.faults {
        load_seeds[case.load_index] = case.load_seed;
    }
    let pre: Vec<PhasorSolution> = load_seeds
        .par_iter()
        .map(|&seed| solve_phasors(network, &LoadScenario::random(seed, n_loads), None))
        .collect::<Result<_>>()?;

    let faults: Vec<Vec<Sample>> = scenarios
        .faults
        .par_iter()
        .map(|case| {
            let spec = case.fault_spec(&opts.waveform, opts.onset_range);
            let scenario = case.load_scenario(n_loads);
            let post = solve_phasors(network, &scenario, Some(&spec))?;
            let pre = &pre[case.load_index];
            windows_of(pre, &post, spec.onset, Some(&spec), opts.selection, opts, &base, case.record_seed)
        })
        .collect::<Result<_>>()?;

    let change_selection = match opts.selection {
        WindowSelection::All => WindowSelection::All,
        _ => WindowSelection::Random,
    };
    let changes: Vec<Vec<Sample>> = scenarios
        .load_changes
        .par_iter()
        .map(|case| {
            let before = solve_phasors(network, &LoadScenario::random(case.before_seed, n_loads), None)?;
            let after = solve_phasors(network, &LoadScenario::random(case.after_seed, n_loads), None)?;
            let onset = case.onset(&opts.waveform, opts.onset_range);
            windows_of(&before, &after, onset, None, change_selection, opts, &base, case.record_seed)
        })
        .collect::<Result<_>>()?;

    let samples: Vec<Sample> = faults.into_iter().chain(changes).flatten().collect();
    let meta = DatasetMeta {
        system: system.to_string(),
        network: network.name().to_string(),
        bus_names: network.buses().iter().map(|b| b.name.clone()).collect(),
        n_buses: n,
        window: opts.window,
        n_samples: samples.len(),
        measured_buses: (0..n).collect(),
        seed: opts.seed,
        snr_db: None,
        selection: opts.selection,
        waveform: opts.waveform,
        adjacency: adjacency.matrix().to_rows(),
        grid: Some(grid.clone()),
    };
    let dataset = Dataset { meta, samples };
    let dataset = if measured.len() < n { apply_mask(&dataset, &measured)? } else { dataset };
    apply_noise(&dataset, opts.snr_db, derive_seed(opts.seed, &[TAG_NOISE_STREAM]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::bundled_network;
    use crate::sim::{FaultCategory, FaultType};

    fn small_grid() -> ScenarioGrid {
        ScenarioGrid {
            categories: vec![FaultCategory::AG, FaultCategory::BC, FaultCategory::ABCG],
            resistances: vec![0.1, 10.0],
            fault_buses: vec![0, 6, 12],
            load_scenarios: 2,
            load_changes: 5,
        }
    }

    #[test]
    fn counts_follow_the_grid() {
        let net = bundled_network("potsdam13").unwrap();
        let d = generate_dataset("potsdam", &net, &small_grid(), &GenerationOptions::default()).unwrap();
        assert_eq!(d.event_counts(), (36, 5));
        assert_eq!(d.type_counts()[FaultType::NF.index()], 5);
        assert_eq!(d.type_counts()[FaultType::LG.index()], 12);
        assert!(d.samples.iter().all(|s| s.features.len() == 13 * 3 * 20));
    }

    #[test]
    fn features_are_per_unit() {
        let net = bundled_network("potsdam13").unwrap();
        let d = generate_dataset("potsdam", &net, &small_grid(), &GenerationOptions::default()).unwrap();
        let peak = d.samples.iter().flat_map(|s| &s.features).fold(0.0f32, |m, x| m.max(x.abs()));
        assert!(peak > 0.5 && peak < 2.0, "peak {peak}");
    }

    #[test]
    fn generation_is_deterministic() {
        let net = bundled_network("potsdam13").unwrap();
        let opts = GenerationOptions {
            snr_db: Some(25.0),
            measured: Some(vec![0, 4, 8]),
            ..Default::default()
        };
        let a = generate_dataset("potsdam", &net, &small_grid(), &opts).unwrap();
        let b = generate_dataset("potsdam", &net, &small_grid(), &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.meta.measured_buses, vec![0, 4, 8]);
        let zero_rows = (0..13).filter(|&bus| a.samples[0].node_row(bus, 20).iter().all(|&x| x == 0.0)).count();
        assert_eq!(zero_rows, 10);
    }

    #[test]
    fn all_selection_labels_pre_onset_windows_as_no_fault() {
        let net = bundled_network("potsdam13").unwrap();
        let grid = ScenarioGrid {
            categories: vec![FaultCategory::AG],
            resistances: vec![1.0],
            fault_buses: vec![2],
            load_scenarios: 1,
            load_changes: 1,
        };
        let opts = GenerationOptions {
            selection: WindowSelection::All,
            ..Default::default()
        };
        let d = generate_dataset("potsdam", &net, &grid, &opts).unwrap();
        assert_eq!(d.len(), 100);
        let faulted = d.samples[..50].iter().filter(|s| s.labels.event).count();
        assert!((15..=35).contains(&faulted), "{faulted} fault windows");
    }

    #[test]
    fn out_of_range_fault_bus_is_rejected() {
        let net = bundled_network("potsdam13").unwrap();
        let mut grid = small_grid();
        grid.fault_buses = vec![13];
        assert!(generate_dataset("potsdam", &net, &grid, &GenerationOptions::default()).is_err());
    }
}
