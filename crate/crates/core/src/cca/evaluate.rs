use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_trial, TemplateBank};
use crate::error::{Error, Result};
use crate::sigproc::{seconds_to_samples, TrialSet};
use crate::stimgen::CombinationId;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
    /// Row-normalized percentages; all-zero rows stay zero.
    pub percent: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    pub fn from_pairs(n_classes: usize, pairs: impl IntoIterator<Item = (u8, u8)>) -> Self {
        let mut counts = vec![vec![0usize; n_classes]; n_classes];
        for (truth, pred) in pairs {
            counts[truth as usize - 1][pred as usize - 1] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn from_counts(counts: Vec<Vec<usize>>) -> Self {
        let percent = counts
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                row.iter()
                    .map(|&c| {
                        if total == 0 {
                            0.0
                        } else {
                            100.0 * c as f64 / total as f64
                        }
                    })
                    .collect()
            })
            .collect();
        ConfusionMatrix { counts, percent }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.correct() as f64 / t as f64,
        }
    }

    /// Trials of true class `truth` predicted as `predicted` (both 1-based).
    pub fn count(&self, truth: u8, predicted: u8) -> usize {
        self.counts[truth as usize - 1][predicted as usize - 1]
    }

    /// Element-wise sum of matrices of equal size.
    pub fn sum<'a>(mats: impl IntoIterator<Item = &'a ConfusionMatrix>) -> Option<Self> {
        let mut it = mats.into_iter();
        let mut acc = it.next()?.counts.clone();
        for m in it {
            for (r, row) in acc.iter_mut().zip(&m.counts) {
                for (a, b) in r.iter_mut().zip(row) {
                    *a += b;
                }
            }
        }
        Some(Self::from_counts(acc))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialScore {
    pub true_class: u8,
    pub predicted_class: u8,
    pub rho: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub combination: CombinationId,
    pub window_s: f64,
    pub n_trials: usize,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub trials: Vec<TrialScore>,
}

/// Classifies the first `window_len_s` seconds of every epoch. The bank is
/// resized when its length does not match the window.
pub fn evaluate(
    trials: &TrialSet,
    bank: &TemplateBank,
    window_len_s: f64,
) -> Result<ClassificationResult> {
    if trials.is_empty() {
        return Err(Error::Empty("trial set".into()));
    }
    if !(window_len_s.is_finite() && window_len_s > 0.0) {
        return Err(Error::param(
            "window_len_s",
            format!("must be positive, got {window_len_s}"),
        ));
    }
    if (trials.fs_hz - bank.fs_hz).abs() > 1e-9 {
        return Err(Error::DimensionMismatch(format!(
            "trials sampled at {} Hz, bank built for {} Hz",
            trials.fs_hz, bank.fs_hz
        )));
    }
    let n = seconds_to_samples(window_len_s, trials.fs_hz) as usize;
    if n > trials.n_samples() {
        return Err(Error::param(
            "window_len_s",
            format!(
                "{window_len_s} s exceeds {:.3} s epochs",
                trials.duration_s()
            ),
        ));
    }
    let k = bank.n_classes();
    if let Some(t) = trials
        .trials
        .iter()
        .find(|t| t.class_label == 0 || t.class_label as usize > k)
    {
        return Err(Error::param(
            "class_label",
            format!("label {} outside 1..={k}", t.class_label),
        ));
    }
    let resized;
    let bank = if bank.n_samples == n {
        bank
    } else {
        resized = bank.resized(n)?;
        &resized
    };
    let scores = trials
        .trials
        .par_iter()
        .map(|t| {
            let window = t.data.slice(ndarray::s![.., ..n]).to_owned();
            let s = classify_trial(&window, bank)?;
            Ok(TrialScore {
                true_class: t.class_label,
                predicted_class: s.predicted_class,
                rho: s.rho,
                margin: s.margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let confusion =
        ConfusionMatrix::from_pairs(k, scores.iter().map(|s| (s.true_class, s.predicted_class)));
    Ok(ClassificationResult {
        combination: bank.combination.id,
        window_s: window_len_s,
        n_trials: scores.len(),
        accuracy: confusion.accuracy(),
        confusion,
        trials: scores,
    })
}
