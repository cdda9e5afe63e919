use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fault::{apply_fault_stamp, FaultSpec};
use crate::error::{Error, Result};
use crate::grid::{build_admittance_with_loads, source_injections, NetworkGraph, PHASES};

/// Largest accepted relative KCL residual of a solved operating point.
pub const MAX_RESIDUAL: f64 = 1e-9;

pub const MULTIPLIER_RANGE: (f64, f64) = (0.5, 1.5);

/// Per-load, per-phase scaling of nominal load admittances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadScenario {
    pub seed: u64,
    pub multipliers: Vec<[f64; PHASES]>,
}

impl LoadScenario {
    /// Every load at its nominal value.
    pub fn nominal(n_loads: usize) -> Self {
        Self {
            seed: 0,
            multipliers: vec![[1.0; PHASES]; n_loads],
        }
    }

    /// Multipliers drawn uniformly from [0.5, 1.5) with a seeded generator.
    pub fn random(seed: u64, n_loads: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = MULTIPLIER_RANGE;
        let multipliers = (0..n_loads)
            .map(|_| [0; PHASES].map(|_| rng.random_range(lo..hi)))
            .collect();
        Self { seed, multipliers }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasorSolution {
    /// Per-bus, per-phase voltage phasors (peak phase-to-ground).
    pub voltages: Vec<[Complex64; PHASES]>,
    /// `||Y'V - I|| / ||I||` of the solved system.
    pub residual: f64,
}

impl PhasorSolution {
    pub fn magnitude(&self, bus: usize, phase: usize) -> f64 {
        self.voltages[bus][phase].norm()
    }

    /// Voltage magnitudes across each fault resistance: phase-to-ground for
    /// grounded phases, then phase-to-phase for bridged pairs.
    pub fn fault_path_voltages(&self, fault: &FaultSpec) -> Vec<f64> {
        let v = &self.voltages[fault.bus];
        let ground = fault.category.ground_phases().iter().map(|&p| v[p].norm());
        let pairs = fault.category.phase_pairs().iter().map(|&(p, q)| (v[p] - v[q]).norm());
        ground.chain(pairs).collect()
    }
}

/// Solves the nodal equations for one operating point, optionally with a
/// fault stamped into the admittance matrix.
pub fn solve_phasors(
    network: &NetworkGraph,
    scenario: &LoadScenario,
    fault: Option<&FaultSpec>,
) -> Result<PhasorSolution> {
    if scenario.multipliers.iter().flatten().any(|&m| !(m > 0.0)) {
        return Err(Error::InvalidArgument("load multipliers must be positive".into()));
    }
    let mut y = build_admittance_with_loads(network, &scenario.multipliers)?;
    if let Some(f) = fault {
        y = apply_fault_stamp(&y, f)?;
    }
    let current = source_injections(network);
    let v = y.matrix().solve(&current)?;

    let applied = y.matrix().mul_vec(&v);
    let num: f64 = applied
        .iter()
        .zip(&current)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = current.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let residual = if den > 0.0 { num / den } else { num };
    if !residual.is_finite() {
        return Err(Error::NonFinite("phasor solution".into()));
    }
    if residual > MAX_RESIDUAL {
        return Err(Error::InvalidArgument(format!(
            "phasor solution residual {residual:e} exceeds {MAX_RESIDUAL:e}"
        )));
    }

    let voltages = v
        .chunks_exact(PHASES)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok(PhasorSolution { voltages, residual })
}
