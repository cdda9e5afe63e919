use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{derive_seed, Dataset, Sample};
use crate::error::{Error, Result};
use crate::grid::PHASES;

const TAG_NOISE: u64 = 0x4e4f_4953;

/// Adds zero-mean Gaussian noise whose standard deviation is the RMS of each
/// bus-phase trace scaled by `10^(-snr_db/20)`. An infinite SNR returns the
/// sample unchanged; all-zero (unmeasured) traces stay zero.
pub fn add_noise(sample: &Sample, window: usize, snr_db: f64, seed: u64) -> Result<Sample> {
    if snr_db.is_nan() {
        return Err(Error::InvalidArgument("SNR must not be NaN".into()));
    }
    if snr_db == f64::INFINITY {
        return Ok(sample.clone());
    }
    if window == 0 || sample.features.len() % window != 0 {
        return Err(Error::shape("add_noise", &[sample.features.len()], &[window]));
    }
    let ratio = 10f64.powf(-snr_db / 20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(sample.features.len());
    for trace in sample.features.chunks_exact(window) {
        let rms = (trace.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>() / window as f64).sqrt();
        let sigma = rms * ratio;
        for &x in trace {
            let n: f64 = StandardNormal.sample(&mut rng);
            features.push((f64::from(x) + sigma * n) as f32);
        }
    }
    Ok(Sample {
        features,
        labels: sample.labels,
    })
}

/// Zeroes the node rows of buses outside `measured`.
pub fn mask_measurements(sample: &Sample, window: usize, measured: &[usize]) -> Result<Sample> {
    if measured.is_empty() {
        return Err(Error::InvalidArgument("at least one measured bus is required".into()));
    }
    let row = PHASES * window;
    if row == 0 || sample.features.len() % row != 0 {
        return Err(Error::shape("mask_measurements", &[sample.features.len()], &[row]));
    }
    let n_buses = sample.features.len() / row;
    if let Some(&b) = measured.iter().find(|&&b| b >= n_buses) {
        return Err(Error::InvalidArgument(format!("measured bus {b} outside 0..{n_buses}")));
    }
    let mut out = sample.clone();
    for bus in (0..n_buses).filter(|b| !measured.contains(b)) {
        out.features[bus * row..(bus + 1) * row].fill(0.0);
    }
    Ok(out)
}

/// Noise for every sample of a dataset, seeded per sample position.
pub fn apply_noise(dataset: &Dataset, snr_db: Option<f64>, seed: u64) -> Result<Dataset> {
    let Some(snr) = snr_db else {
        return Ok(dataset.clone());
    };
    let k = dataset.window();
    let samples = dataset
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| add_noise(s, k, snr, derive_seed(seed, &[TAG_NOISE, i as u64])))
        .collect::<Result<Vec<_>>>()?;
    let mut out = dataset.with_samples(samples);
    out.meta.snr_db = if snr.is_finite() { Some(snr) } else { None };
    Ok(out)
}

/// Restricts every sample of a dataset to the measured buses.
pub fn apply_mask(dataset: &Dataset, measured: &[usize]) -> Result<Dataset> {
    let k = dataset.window();
    let samples = dataset
        .samples
        .iter()
        .map(|s| mask_measurements(s, k, measured))
        .collect::<Result<Vec<_>>>()?;
    let mut out = dataset.with_samples(samples);
    let mut kept: Vec<usize> = out
        .meta
        .measured_buses
        .iter()
        .copied()
        .filter(|b| measured.contains(b))
        .collect();
    kept.sort_unstable();
    out.meta.measured_buses = kept;
    Ok(out)
}
