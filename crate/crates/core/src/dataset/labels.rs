use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Sample;
use crate::error::{Error, Result};
use crate::sim::{FaultSpec, FaultType};

/// Diagnostic tasks; each one trains its own head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Event,
    Type,
    Phase,
    Location,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Event, Task::Type, Task::Phase, Task::Location];

    /// Head output width: 1 logit for event, otherwise one per class.
    pub fn output_width(self, n_buses: usize) -> usize {
        match self {
            Task::Event => 1,
            Task::Type => 6,
            Task::Phase => 3,
            Task::Location => n_buses,
        }
    }

    pub fn n_classes(self, n_buses: usize) -> usize {
        match self {
            Task::Event => 2,
            other => other.output_width(n_buses),
        }
    }

    /// Class index for this task, or `None` where the label is undefined.
    pub fn target(self, labels: &Labels) -> Option<usize> {
        match self {
            Task::Event => Some(labels.event as usize),
            Task::Type => Some(labels.fault_type.index()),
            Task::Phase => labels.phase.map(usize::from),
            Task::Location => labels.location.map(usize::from),
        }
    }

    pub fn class_names(self, bus_names: &[String]) -> Vec<String> {
        match self {
            Task::Event => vec!["no-fault".into(), "fault".into()],
            Task::Type => FaultType::ALL.iter().map(|t| t.name().to_string()).collect(),
            Task::Phase => vec!["A|AB".into(), "B|BC".into(), "C|CA".into()],
            Task::Location => bus_names.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Event => "event",
            Task::Type => "type",
            Task::Phase => "phase",
            Task::Location => "location",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown task `{s}`")))
    }
}

/// Event, type, phase and location labels. Phase and location are `None`
/// where undefined (no fault, or a symmetrical fault for phase).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Labels {
    pub event: bool,
    pub fault_type: FaultType,
    pub phase: Option<u8>,
    pub location: Option<u16>,
}

impl Labels {
    pub fn no_fault() -> Self {
        Self {
            event: false,
            fault_type: FaultType::NF,
            phase: None,
            location: None,
        }
    }

    pub fn type_one_hot(&self) -> [f64; 6] {
        let mut v = [0.0; 6];
        v[self.fault_type.index()] = 1.0;
        v
    }

    pub fn phase_one_hot(&self) -> Option<[f64; 3]> {
        self.phase.map(|p| {
            let mut v = [0.0; 3];
            v[p as usize] = 1.0;
            v
        })
    }

    pub fn location_one_hot(&self, n_buses: usize) -> Option<Vec<f64>> {
        self.location.map(|l| {
            let mut v = vec![0.0; n_buses];
            v[l as usize] = 1.0;
            v
        })
    }
}

/// Labels a window spanning samples `start..end` of a record.
///
/// The window counts as a fault sample only when the onset falls before its
/// end; earlier windows of a fault record are labeled as no-fault.
pub fn label(features: Vec<f32>, fault: Option<&FaultSpec>, span: (usize, usize), onset_index: usize) -> Sample {
    let labels = match fault {
        Some(f) if onset_index < span.1 => Labels {
            event: true,
            fault_type: f.category.fault_type(),
            phase: f.category.phase_label().map(|p| p as u8),
            location: Some(f.bus as u16),
        },
        _ => Labels::no_fault(),
    };
    Sample { features, labels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::FaultCategory;

    fn fault(category: FaultCategory, bus: usize) -> FaultSpec {
        FaultSpec {
            category,
            resistance: 1.0,
            bus,
            onset: 0.5,
        }
    }

    #[test]
    fn bg_is_single_phase_b() {
        let s = label(vec![], Some(&fault(FaultCategory::BG, 3)), (480, 500), 490);
        assert!(s.labels.event);
        assert_eq!(s.labels.type_one_hot(), [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.labels.phase_one_hot(), Some([0.0, 1.0, 0.0]));
    }

    #[test]
    fn no_fault_has_invalid_phase_and_location() {
        let s = label(vec![], None, (0, 20), 0);
        assert!(!s.labels.event);
        assert_eq!(s.labels.fault_type, FaultType::NF);
        assert_eq!(s.labels.phase, None);
        assert_eq!(s.labels.location, None);
    }

    #[test]
    fn ca_at_bus_seven() {
        let s = label(vec![], Some(&fault(FaultCategory::CA, 7)), (480, 500), 481);
        assert_eq!(s.labels.fault_type, FaultType::LL);
        assert_eq!(s.labels.phase, Some(2));
        let loc = s.labels.location_one_hot(13).unwrap();
        assert_eq!(loc.iter().sum::<f64>(), 1.0);
        assert_eq!(loc[7], 1.0);
    }

    #[test]
    fn window_before_onset_is_no_fault() {
        let s = label(vec![], Some(&fault(FaultCategory::AG, 1)), (0, 20), 20);
        assert_eq!(s.labels, Labels::no_fault());
    }

    #[test]
    fn symmetric_faults_have_no_phase() {
        for c in [FaultCategory::ABC, FaultCategory::ABCG] {
            let s = label(vec![], Some(&fault(c, 0)), (0, 20), 3);
            assert_eq!(s.labels.phase, None);
            assert_eq!(Task::Phase.target(&s.labels), None);
            assert_eq!(Task::Location.target(&s.labels), Some(0));
        }
    }
}
