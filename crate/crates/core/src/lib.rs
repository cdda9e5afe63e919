//! Fault diagnosis for power distribution networks with temporal recurrent
//! graph convolutional networks.
//!
//! The crate covers the whole experiment: network matrices, quasi-static fault
//! waveform generation, windowed graph datasets, a small f64 layer library with
//! hand-written backward passes, training with transfer learning, and
//! evaluation reports.

pub mod error;
pub mod eval;
pub mod experiment;
pub mod grid;
pub mod layers;
pub mod nn;
pub mod dataset;
pub mod sim;
pub mod train;

pub use error::{Error, Result};
