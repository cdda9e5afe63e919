use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{FaultCategory, FaultSpec, LoadScenario, WaveformParams};

const TAG_LOAD: u64 = 0x4c4f_4144;
const TAG_FAULT: u64 = 0x4641_554c;
const TAG_CHANGE: u64 = 0x4348_4e47;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable seed derived from a master seed and an index tuple. Independent of
/// platform, thread count and iteration order.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGrid {
    pub categories: Vec<FaultCategory>,
    /// Fault resistances in ohms.
    pub resistances: Vec<f64>,
    /// Fault node indices (0-based).
    pub fault_buses: Vec<usize>,
    pub load_scenarios: usize,
    pub load_changes: usize,
}

impl ScenarioGrid {
    pub fn validate(&self) -> Result<()> {
        if self.categories.is_empty() || self.resistances.is_empty() || self.fault_buses.is_empty() {
            return Err(Error::InvalidArgument("scenario grid lists must be nonempty".into()));
        }
        if self.load_scenarios == 0 || self.load_changes == 0 {
            return Err(Error::InvalidArgument("scenario grid counts must be positive".into()));
        }
        if let Some(r) = self.resistances.iter().find(|&&r| !(r > 0.0)) {
            return Err(Error::InvalidArgument(format!("fault resistance {r} must be positive")));
        }
        Ok(())
    }

    pub fn fault_case_count(&self) -> usize {
        self.categories.len() * self.resistances.len() * self.fault_buses.len() * self.load_scenarios
    }
}

/// One fault configuration under one load scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultCase {
    pub category: FaultCategory,
    pub resistance: f64,
    pub resistance_index: usize,
    pub bus: usize,
    pub load_index: usize,
    pub load_seed: u64,
    /// Seed for per-record randomness (onset, window choice).
    pub record_seed: u64,
}

impl FaultCase {
    /// Fault with an onset drawn on the sample grid inside `onset_range`.
    pub fn fault_spec(&self, params: &WaveformParams, onset_range: (f64, f64)) -> FaultSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(self.record_seed);
        FaultSpec {
            category: self.category,
            resistance: self.resistance,
            bus: self.bus,
            onset: draw_onset(&mut rng, params, onset_range),
        }
    }

    pub fn load_scenario(&self, n_loads: usize) -> LoadScenario {
        LoadScenario::random(self.load_seed, n_loads)
    }
}

/// A no-fault record switching between two random load scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadChangeCase {
    pub index: usize,
    pub before_seed: u64,
    pub after_seed: u64,
    pub record_seed: u64,
}

impl LoadChangeCase {
    pub fn onset(&self, params: &WaveformParams, onset_range: (f64, f64)) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.record_seed);
        draw_onset(&mut rng, params, onset_range)
    }
}

fn draw_onset(rng: &mut ChaCha8Rng, params: &WaveformParams, (lo, hi): (f64, f64)) -> f64 {
    let first = ((lo * params.fs).ceil() as usize).max(1);
    let last = ((hi * params.fs).floor() as usize).min(params.n_samples() - 1).max(first + 1);
    rng.random_range(first..last) as f64 / params.fs
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenarios {
    pub faults: Vec<FaultCase>,
    pub load_changes: Vec<LoadChangeCase>,
}

/// Expands the grid in category-major order, then resistance, bus and load
/// scenario. Load scenario `s` is shared by every fault configuration.
pub fn enumerate_scenarios(grid: &ScenarioGrid, master_seed: u64) -> Result<Scenarios> {
    grid.validate()?;
    let load_seeds: Vec<u64> = (0..grid.load_scenarios)
        .map(|s| derive_seed(master_seed, &[TAG_LOAD, s as u64]))
        .collect();
    let mut faults = Vec::with_capacity(grid.fault_case_count());
    for (ci, &category) in grid.categories.iter().enumerate() {
        for (ri, &resistance) in grid.resistances.iter().enumerate() {
            for &bus in &grid.fault_buses {
                for (s, &load_seed) in load_seeds.iter().enumerate() {
                    faults.push(FaultCase {
                        category,
                        resistance,
                        resistance_index: ri,
                        bus,
                        load_index: s,
                        load_seed,
                        record_seed: derive_seed(
                            master_seed,
                            &[TAG_FAULT, ci as u64, ri as u64, bus as u64, s as u64],
                        ),
                    });
                }
            }
        }
    }
    let load_changes = (0..grid.load_changes)
        .map(|i| LoadChangeCase {
            index: i,
            before_seed: derive_seed(master_seed, &[TAG_CHANGE, i as u64, 0]),
            after_seed: derive_seed(master_seed, &[TAG_CHANGE, i as u64, 1]),
            record_seed: derive_seed(master_seed, &[TAG_CHANGE, i as u64, 2]),
        })
        .collect();
    Ok(Scenarios { faults, load_changes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(categories: usize, resistances: usize, buses: usize, loads: usize) -> ScenarioGrid {
        ScenarioGrid {
            categories: FaultCategory::ALL[..categories].to_vec(),
            resistances: [0.1, 1.0, 10.0][..resistances].to_vec(),
            fault_buses: (0..buses).collect(),
            load_scenarios: loads,
            load_changes: 1,
        }
    }

    #[test]
    fn potsdam_table_product() {
        let s = enumerate_scenarios(&grid(11, 3, 13, 150), 1).unwrap();
        assert_eq!(s.faults.len(), 64_350);
    }

    #[test]
    fn feeder_table_product() {
        let s = enumerate_scenarios(&grid(11, 3, 25, 50), 1).unwrap();
        assert_eq!(s.faults.len(), 41_250);
    }

    #[test]
    fn unit_grid_has_one_case() {
        assert_eq!(enumerate_scenarios(&grid(1, 1, 1, 1), 1).unwrap().faults.len(), 1);
    }

    #[test]
    fn ordering_is_category_major() {
        let s = enumerate_scenarios(&grid(2, 3, 2, 2), 9).unwrap();
        assert_eq!(s.faults[0].category, FaultCategory::AG);
        assert_eq!(s.faults[12].category, FaultCategory::BG);
        assert_eq!(s.faults[1].load_index, 1);
        assert_eq!(s.faults[2].bus, 1);
        assert_eq!(s.faults[4].resistance, 1.0);
        // same load scenario index shares the seed across configurations
        assert_eq!(s.faults[0].load_seed, s.faults[14].load_seed);
    }

    #[test]
    fn empty_lists_are_rejected() {
        let mut g = grid(1, 1, 1, 1);
        g.fault_buses.clear();
        assert!(enumerate_scenarios(&g, 0).is_err());
    }

    #[test]
    fn onsets_lie_on_sample_grid_inside_range() {
        let s = enumerate_scenarios(&grid(11, 3, 4, 3), 5).unwrap();
        let params = WaveformParams::default();
        for case in &s.faults {
            let f = case.fault_spec(&params, (0.3, 0.7));
            assert!((0.3..0.7).contains(&f.onset));
            let k = f.onset * params.fs;
            assert_eq!(k, k.round());
        }
    }

    #[test]
    fn derived_seeds_are_stable() {
        assert_eq!(derive_seed(42, &[1, 2, 3]), derive_seed(42, &[1, 2, 3]));
        assert_ne!(derive_seed(42, &[1, 2, 3]), derive_seed(42, &[1, 3, 2]));
        assert_ne!(derive_seed(42, &[1]), derive_seed(43, &[1]));
    }
}
