use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of exact matches.
pub fn accuracy(predicted: &[usize], labels: &[usize]) -> Result<f64> {
    if predicted.len() != labels.len() {
        return Err(Error::shape("accuracy", &[predicted.len()], &[labels.len()]));
    }
    if labels.is_empty() {
        return Err(Error::Empty("accuracy input"));
    }
    let hits = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Counts with rows = true class and columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn column_total(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    /// Per-class true-positive rate; `None` for classes absent from the labels.
    pub fn recall(&self) -> Vec<Option<f64>> {
        (0..self.n_classes())
            .map(|i| match self.row_total(i) {
                0 => None,
                t => Some(self.counts[i][i] as f64 / t as f64),
            })
            .collect()
    }

    /// Per-class positive predictive value; `None` for never-predicted classes.
    pub fn precision(&self) -> Vec<Option<f64>> {
        (0..self.n_classes())
            .map(|j| match self.column_total(j) {
                0 => None,
                t => Some(self.counts[j][j] as f64 / t as f64),
            })
            .collect()
    }
}

pub fn confusion(predicted: &[usize], labels: &[usize], class_names: &[String]) -> Result<ConfusionMatrix> {
    if predicted.len() != labels.len() {
        return Err(Error::shape("confusion", &[predicted.len()], &[labels.len()]));
    }
    let c = class_names.len();
    let mut counts = vec![vec![0u64; c]; c];
    for (&p, &l) in predicted.iter().zip(labels) {
        if p >= c || l >= c {
            return Err(Error::InvalidArgument(format!("class index {} outside {c} classes", p.max(l))));
        }
        counts[l][p] += 1;
    }
    Ok(ConfusionMatrix {
        class_names: class_names.to_vec(),
        counts,
    })
}

/// ROC curve from the highest threshold down; the first point is (0, 0) at
/// an infinite threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RocResult {
    pub thresholds: Vec<f64>,
    pub tpr: Vec<f64>,
    pub fpr: Vec<f64>,
    pub auc: f64,
}

/// ROC and trapezoidal AUC; samples with equal scores form a single step.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocResult> {
    if scores.len() != labels.len() {
        return Err(Error::shape("roc_auc", &[scores.len()], &[labels.len()]));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("roc_auc scores".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument("ROC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (mut thresholds, mut tpr, mut fpr) = (vec![f64::INFINITY], vec![0.0], vec![0.0]);
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (t, f) = (tp as f64 / pos as f64, fp as f64 / neg as f64);
        auc += (f - fpr[fpr.len() - 1]) * (t + tpr[tpr.len() - 1]) / 2.0;
        thresholds.push(s);
        tpr.push(t);
        fpr.push(f);
    }
    Ok(RocResult {
        thresholds,
        tpr,
        fpr,
        auc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0, 0, 0], &[0, 1, 0, 1]).unwrap(), 0.5);
        assert!(matches!(accuracy(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn perfect_confusion_is_diagonal() {
        let labels = [0, 1, 2, 2, 1, 0, 0];
        let c = confusion(&labels, &labels, &names(3)).unwrap();
        assert_eq!(c.counts, vec![vec![3, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]);
        assert!(c.recall().iter().chain(&c.precision()).all(|v| *v == Some(1.0)));
    }

    #[test]
    fn three_line_recall_example() {
        // 764 of 780 true 3L samples predicted correctly.
        let mut labels = vec![4; 780];
        let mut predicted = vec![4; 764];
        predicted.extend(vec![5; 16]);
        labels.extend([0, 1]);
        predicted.extend([0, 1]);
        let c = confusion(&predicted, &labels, &names(6)).unwrap();
        let r = c.recall()[4].unwrap();
        assert!((r * 100.0 - 97.9).abs() < 0.05, "{r}");
        assert_eq!(c.row_total(4), 780);
    }

    #[test]
    fn separated_and_constant_scores() {
        let r = roc_auc(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(r.auc, 1.0);
        let r = roc_auc(&[0.5; 6], &[true, false, true, false, true, false]).unwrap();
        assert_eq!(r.auc, 0.5);
        assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_err());
    }

    fn pairwise(scores: &[f64], labels: &[bool]) -> f64 {
        let mut total = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    pairs += 1.0;
                    total += match scores[i].partial_cmp(&scores[j]).unwrap() {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => 0.5,
                        std::cmp::Ordering::Less => 0.0,
                    };
                }
            }
        }
        total / pairs
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_oracle(data in prop::collection::vec((0u8..20, any::<bool>()), 2..200)) {
            let scores: Vec<f64> = data.iter().map(|(s, _)| f64::from(*s) / 7.0).collect();
            let labels: Vec<bool> = data.iter().map(|(_, l)| *l).collect();
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            let r = roc_auc(&scores, &labels).unwrap();
            prop_assert!((r.auc - pairwise(&scores, &labels)).abs() < 1e-12);
            prop_assert!(r.tpr.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(r.fpr.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn confusion_trace_reproduces_accuracy(data in prop::collection::vec((0usize..4, 0usize..4), 1..100)) {
            let (p, l): (Vec<_>, Vec<_>) = data.into_iter().unzip();
            let c = confusion(&p, &l, &names(4)).unwrap();
            prop_assert_eq!(c.accuracy(), accuracy(&p, &l).unwrap());
            prop_assert_eq!(c.total(), l.len() as u64);
        }
    }
}
