use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Labels};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train_fault: usize,
    pub test_fault: usize,
    pub train_nf: usize,
    pub test_nf: usize,
}

impl SplitCounts {
    pub fn train_total(&self) -> usize {
        self.train_fault + self.train_nf
    }

    pub fn test_total(&self) -> usize {
        self.test_fault + self.test_nf
    }
}

/// Seeded selection without replacement within the fault and non-fault
/// classes. Returns sorted (train, test) index lists.
pub fn split_indices(labels: &[Labels], counts: SplitCounts, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut fault: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].event).collect();
    let mut nf: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i].event).collect();
    let need_fault = counts.train_fault + counts.test_fault;
    let need_nf = counts.train_nf + counts.test_nf;
    if need_fault > fault.len() {
        return Err(Error::InsufficientSamples {
            class: "fault",
            requested: need_fault,
            available: fault.len(),
        });
    }
    if need_nf > nf.len() {
        return Err(Error::InsufficientSamples {
            class: "non-fault",
            requested: need_nf,
            available: nf.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fault.shuffle(&mut rng);
    nf.shuffle(&mut rng);

    let mut train: Vec<usize> = fault[..counts.train_fault]
        .iter()
        .chain(&nf[..counts.train_nf])
        .copied()
        .collect();
    let mut test: Vec<usize> = fault[counts.train_fault..need_fault]
        .iter()
        .chain(&nf[counts.train_nf..need_nf])
        .copied()
        .collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(dataset: &Dataset, counts: SplitCounts, seed: u64) -> Result<(Dataset, Dataset)> {
    let labels: Vec<Labels> = dataset.samples.iter().map(|s| s.labels).collect();
    let (train, test) = split_indices(&labels, counts, seed)?;
    let pick = |idx: &[usize]| dataset.with_samples(idx.iter().map(|&i| dataset.samples[i].clone()).collect());
    Ok((pick(&train), pick(&test)))
}
