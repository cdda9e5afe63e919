use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::AdmittanceMatrix;

/// Short-circuit categories by involved phases and ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaultCategory {
    AG,
    BG,
    CG,
    AB,
    BC,
    CA,
    ABG,
    BCG,
    CAG,
    ABC,
    ABCG,
}

/// Six-way fault type, in label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaultType {
    NF,
    LG,
    LL,
    LLG,
    #[serde(rename = "3L")]
    ThreeL,
    #[serde(rename = "3LG")]
    ThreeLG,
}

impl FaultType {
    pub const ALL: [FaultType; 6] = [
        FaultType::NF,
        FaultType::LG,
        FaultType::LL,
        FaultType::LLG,
        FaultType::ThreeL,
        FaultType::ThreeLG,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            FaultType::NF => "NF",
            FaultType::LG => "LG",
            FaultType::LL => "LL",
            FaultType::LLG => "LLG",
            FaultType::ThreeL => "3L",
            FaultType::ThreeLG => "3LG",
        }
    }

    /// Phase labels exist only for the asymmetrical types.
    pub fn is_asymmetrical(self) -> bool {
        matches!(self, FaultType::LG | FaultType::LL | FaultType::LLG)
    }
}

impl FaultCategory {
    pub const ALL: [FaultCategory; 11] = [
        FaultCategory::AG,
        FaultCategory::BG,
        FaultCategory::CG,
        FaultCategory::AB,
        FaultCategory::BC,
        FaultCategory::CA,
        FaultCategory::ABG,
        FaultCategory::BCG,
        FaultCategory::CAG,
        FaultCategory::ABC,
        FaultCategory::ABCG,
    ];

    pub fn fault_type(self) -> FaultType {
        use FaultCategory::*;
        match self {
            AG | BG | CG => FaultType::LG,
            AB | BC | CA => FaultType::LL,
            ABG | BCG | CAG => FaultType::LLG,
            ABC => FaultType::ThreeL,
            ABCG => FaultType::ThreeLG,
        }
    }

    /// Position 0/1/2 meaning A/B/C for single-phase faults and AB/BC/CA for
    /// two-phase faults; `None` for symmetrical faults.
    pub fn phase_label(self) -> Option<usize> {
        use FaultCategory::*;
        match self {
            AG | AB | ABG => Some(0),
            BG | BC | BCG => Some(1),
            CG | CA | CAG => Some(2),
            ABC | ABCG => None,
        }
    }

    /// Phases connected to ground through the fault resistance.
    pub fn ground_phases(self) -> &'static [usize] {
        use FaultCategory::*;
        match self {
            AG => &[0],
            BG => &[1],
            CG => &[2],
            ABG => &[0, 1],
            BCG => &[1, 2],
            CAG => &[2, 0],
            ABCG => &[0, 1, 2],
            AB | BC | CA | ABC => &[],
        }
    }

    /// Phase pairs bridged by the fault resistance.
    pub fn phase_pairs(self) -> &'static [(usize, usize)] {
        use FaultCategory::*;
        match self {
            AB => &[(0, 1)],
            BC => &[(1, 2)],
            CA => &[(2, 0)],
            ABC => &[(0, 1), (1, 2), (2, 0)],
            _ => &[],
        }
    }

    /// Phases touched by the fault in any way.
    pub fn faulted_phases(self) -> Vec<usize> {
        let mut phases: Vec<usize> = self.ground_phases().to_vec();
        for &(p, q) in self.phase_pairs() {
            phases.extend([p, q]);
        }
        phases.sort_unstable();
        phases.dedup();
        phases
    }

    pub fn name(self) -> &'static str {
        use FaultCategory::*;
        match self {
            AG => "AG",
            BG => "BG",
            CG => "CG",
            AB => "AB",
            BC => "BC",
            CA => "CA",
            ABG => "ABG",
            BCG => "BCG",
            CAG => "CAG",
            ABC => "ABC",
            ABCG => "ABCG",
        }
    }
}

impl fmt::Display for FaultCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FaultCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FaultCategory::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown fault category `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub category: FaultCategory,
    /// Fault path resistance in ohms.
    pub resistance: f64,
    pub bus: usize,
    /// Onset instant in seconds from the start of the record.
    pub onset: f64,
}

impl FaultSpec {
    pub fn validate(&self, n_buses: usize, duration: f64) -> Result<()> {
        if !(self.resistance > 0.0) || !self.resistance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "fault resistance must be positive, got {}",
                self.resistance
            )));
        }
        if self.bus >= n_buses {
            return Err(Error::InvalidArgument(format!(
                "fault bus {} outside 0..{n_buses}",
                self.bus
            )));
        }
        if !(self.onset > 0.0 && self.onset < duration) {
            return Err(Error::InvalidArgument(format!(
                "fault onset {} outside (0, {duration})",
                self.onset
            )));
        }
        Ok(())
    }

    fn stamps(&self) -> Vec<(usize, usize, f64)> {
        let g = 1.0 / self.resistance;
        let mut out = Vec::new();
        for &p in self.category.ground_phases() {
            let i = AdmittanceMatrix::index(self.bus, p);
            out.push((i, i, g));
        }
        for &(p, q) in self.category.phase_pairs() {
            let i = AdmittanceMatrix::index(self.bus, p);
            let j = AdmittanceMatrix::index(self.bus, q);
            out.extend([(i, i, g), (j, j, g), (i, j, -g), (j, i, -g)]);
        }
        out
    }
}

fn check_bus(y: &AdmittanceMatrix, fault: &FaultSpec) -> Result<()> {
    if AdmittanceMatrix::index(fault.bus, 2) >= y.dim() || !(fault.resistance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fault at bus {} with resistance {} does not fit a {}x{} admittance matrix",
            fault.bus,
            fault.resistance,
            y.dim(),
            y.dim()
        )));
    }
    Ok(())
}

/// Adds the fault conductances to a copy of `y`.
pub fn apply_fault_stamp(y: &AdmittanceMatrix, fault: &FaultSpec) -> Result<AdmittanceMatrix> {
    check_bus(y, fault)?;
    let mut out = y.clone();
    for (i, j, g) in fault.stamps() {
        out.matrix_mut()[(i, j)] += Complex64::new(g, 0.0);
    }
    Ok(out)
}

/// Subtracts the same conductances that [`apply_fault_stamp`] adds.
pub fn remove_fault_stamp(y: &AdmittanceMatrix, fault: &FaultSpec) -> Result<AdmittanceMatrix> {
    check_bus(y, fault)?;
    let mut out = y.clone();
    for (i, j, g) in fault.stamps() {
        out.matrix_mut()[(i, j)] -= Complex64::new(g, 0.0);
    }
    Ok(out)
}
