use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PHASES;
use crate::sim::WaveformRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSelection {
    /// Every non-overlapping window; a trailing remainder is dropped.
    All,
    /// The window containing the onset sample.
    #[default]
    FaultSpanning,
    /// One uniformly chosen window.
    Random,
}

/// `len` samples starting at `start`, laid out `N x 3 x len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub start: usize,
    pub len: usize,
    pub features: Vec<f64>,
}

impl Window {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// Index of the grid-aligned window of length `k` holding `onset_index`.
pub(crate) fn spanning_index(onset_index: usize, k: usize, n_windows: usize) -> usize {
    (onset_index / k).min(n_windows.saturating_sub(1))
}

pub(crate) fn random_index(seed: u64, n_windows: usize) -> usize {
    ChaCha8Rng::seed_from_u64(seed).random_range(0..n_windows)
}

fn cut(record: &WaveformRecord, start: usize, k: usize) -> Window {
    let t = record.n_samples();
    let mut features = Vec::with_capacity(record.n_buses * PHASES * k);
    for trace in record.samples.chunks_exact(t) {
        features.extend_from_slice(&trace[start..start + k]);
    }
    Window {
        start,
        len: k,
        features,
    }
}

/// Cuts a record into windows of `k` samples aligned at multiples of `k`.
pub fn window(record: &WaveformRecord, k: usize, selection: WindowSelection, seed: u64) -> Result<Vec<Window>> {
    let t = record.n_samples();
    if k == 0 || k > t {
        return Err(Error::InvalidArgument(format!("window length {k} does not fit {t} samples")));
    }
    let n_windows = t / k;
    let pick = |j: usize| cut(record, j * k, k);
    Ok(match selection {
        WindowSelection::All => (0..n_windows).map(pick).collect(),
        WindowSelection::FaultSpanning => vec![pick(spanning_index(record.onset_index(), k, n_windows))],
        WindowSelection::Random => vec![pick(random_index(seed, n_windows))],
    })
}
