//! Quasi-static fault simulation: phasor solves before and after a fault,
//! and waveform synthesis with a hard switch at the onset instant.

mod fault;
mod solve;
mod waveform;

pub use fault::{apply_fault_stamp, remove_fault_stamp, FaultCategory, FaultSpec, FaultType};
pub use solve::{solve_phasors, LoadScenario, PhasorSolution, MAX_RESIDUAL};
pub use waveform::{synthesize_span, synthesize_waveforms, WaveformParams, WaveformRecord};
