//! Canonical correlation frequency recognition.
//!
//! Each target owns a reference matrix of sine/cosine rows at its template
//! frequencies. A trial is scored against every target by the largest
//! canonical correlation between the template rows and the EEG channels;
//! the target with the largest score wins.
//!
//! The correlation is computed by whitening each side's row covariance
//! (after per-row mean removal, with a small ridge) and taking the largest
//! singular value of the whitened cross-covariance.

mod evaluate;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stimgen::{component_frequencies, Combination, StimulusSpec};

pub use evaluate::{evaluate, ClassificationResult, ConfusionMatrix, TrialScore};

/// Ridge added to each covariance before whitening, relative to its mean
/// eigenvalue.
pub const RIDGE_RELATIVE: f64 = 1e-10;

/// Slack allowed above 1 before clamping round-off.
pub const RHO_TOLERANCE: f64 = 1e-9;

/// Sine/cosine reference rows: for every frequency `g`, `sin(2 pi g k / fs)`
/// then `cos(2 pi g k / fs)`, `k = 0..n_samples`.
pub fn build_template(frequencies: &[f64], fs_hz: f64, n_samples: usize) -> Result<Array2<f64>> {
    if frequencies.is_empty() {
        return Err(Error::param(
            "frequencies",
            "template needs at least one frequency",
        ));
    }
    if !(fs_hz.is_finite() && fs_hz > 0.0) {
        return Err(Error::param(
            "fs_hz",
            format!("must be positive, got {fs_hz}"),
        ));
    }
    if let Some(&bad) = frequencies
        .iter()
        .find(|&&g| !(g.is_finite() && g > 0.0 && g < fs_hz / 2.0))
    {
        return Err(Error::param(
            "frequencies",
            format!("{bad} Hz outside (0, Nyquist = {})", fs_hz / 2.0),
        ));
    }
    let rows = 2 * frequencies.len();
    if n_samples < 2 * rows {
        return Err(Error::param(
            "n_samples",
            format!(
                "{n_samples} samples for {rows} reference rows (need at least {})",
                2 * rows
            ),
        ));
    }
    Ok(Array2::from_shape_fn((rows, n_samples), |(r, k)| {
        let phase = 2.0 * PI * frequencies[r / 2] * k as f64 / fs_hz;
        if r % 2 == 0 {
            phase.sin()
        } else {
            phase.cos()
        }
    }))
}

/// Row-centered data and its whitening transform `C^{-1/2}`.
#[derive(Debug, Clone)]
pub struct Whitened {
    centered: Array2<f64>,
    /// `None` when every row is constant.
    whitening: Option<DMatrix<f64>>,
}

impl Whitened {
    pub fn new(data: &Array2<f64>) -> Self {
        let (p, n) = data.dim();
        let mut centered = data.to_owned();
        for mut row in centered.axis_iter_mut(Axis(0)) {
            let mean = row.sum() / n as f64;
            row -= mean;
        }
        let gram = centered.dot(&centered.t()) / n as f64;
        let trace: f64 = gram.diag().sum();
        if !trace.is_finite() || trace <= 0.0 {
            return Whitened {
                centered,
                whitening: None,
            };
        }
        let ridge = RIDGE_RELATIVE * trace / p as f64;
        let cov = DMatrix::from_fn(p, p, |i, j| {
            let v = 0.5 * (gram[[i, j]] + gram[[j, i]]);
            if i == j {
                v + ridge
            } else {
                v
            }
        });
        let eig = cov.symmetric_eigen();
        let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.max(ridge).sqrt());
        let w =
            &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
        Whitened {
            centered,
            whitening: Some(w),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.centered.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.centered.ncols()
    }
}

/// Largest canonical correlation between two whitened row sets.
pub fn correlate(x: &Whitened, y: &Whitened) -> Result<f64> {
    if x.n_samples() != y.n_samples() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} samples",
            x.n_samples(),
            y.n_samples()
        )));
    }
    let (wx, wy) = match (&x.whitening, &y.whitening) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(0.0),
    };
    let n = x.n_samples() as f64;
    let cross = x.centered.dot(&y.centered.t()) / n;
    let (p, q) = cross.dim();
    let cxy = DMatrix::from_fn(p, q, |i, j| cross[[i, j]]);
    let m = wx * cxy * wy;
    let sv = m.singular_values();
    let rho = sv.iter().cloned().fold(0.0, f64::max);
    Ok(rho.clamp(0.0, 1.0))
}

fn check_shapes(x: &Array2<f64>, y: &Array2<f64>) -> Result<()> {
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "template has {} columns, data has {}",
            x.ncols(),
            y.ncols()
        )));
    }
    for (name, m) in [("x", x), ("y", y)] {
        if m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!("{name} has no rows")));
        }
        if m.ncols() < m.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{name} has {} rows but only {} columns",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    Ok(())
}

/// Largest canonical correlation between the row spaces of `x` and `y`
/// (variables in rows, samples in columns).
pub fn canonical_correlation(x: &Array2<f64>, y: &Array2<f64>) -> Result<f64> {
    check_shapes(x, y)?;
    correlate(&Whitened::new(x), &Whitened::new(y))
}

/// Per-target reference matrices for one combination and window length.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    pub specs: Vec<StimulusSpec>,
    pub combination: Combination,
    pub fs_hz: f64,
    pub n_samples: usize,
    pub class_frequencies: Vec<Vec<f64>>,
    templates: Vec<Array2<f64>>,
    prepared: Vec<Whitened>,
}

impl TemplateBank {
    pub fn new(
        specs: &[StimulusSpec],
        combination: &Combination,
        fs_hz: f64,
        n_samples: usize,
    ) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Empty("stimulus set".into()));
        }
        let class_frequencies = specs
            .iter()
            .enumerate()
            .map(|(i, s)| component_frequencies(s, combination, i))
            .collect::<Result<Vec<_>>>()?;
        let templates = class_frequencies
            .iter()
            .map(|f| build_template(f, fs_hz, n_samples))
            .collect::<Result<Vec<_>>>()?;
        let prepared = templates.iter().map(Whitened::new).collect();
        Ok(TemplateBank {
            specs: specs.to_vec(),
            combination: combination.clone(),
            fs_hz,
            n_samples,
            class_frequencies,
            templates,
            prepared,
        })
    }

    /// Same targets and combination with a different window length.
    pub fn resized(&self, n_samples: usize) -> Result<Self> {
        Self::new(&self.specs, &self.combination, self.fs_hz, n_samples)
    }

    pub fn n_classes(&self) -> usize {
        self.templates.len()
    }

    pub fn template(&self, class_index: usize) -> &Array2<f64> {
        &self.templates[class_index]
    }
}

/// Scores of one trial against every target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcaScore {
    pub rho: Vec<f64>,
    /// 1-based winning target; ties go to the lowest index.
    pub predicted_class: u8,
    pub margin: f64,
}

impl CcaScore {
    pub fn from_rho(rho: Vec<f64>) -> Self {
        let mut best = 0;
        for (i, &r) in rho.iter().enumerate() {
            if r > rho[best] {
                best = i;
            }
        }
        let runner_up = rho
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &r)| r)
            .fold(f64::NEG_INFINITY, f64::max);
        let margin = if runner_up.is_finite() {
            rho[best] - runner_up
        } else {
            rho[best]
        };
        CcaScore {
            predicted_class: (best + 1) as u8,
            margin,
            rho,
        }
    }
}

/// Scores one occipital epoch (channels x samples) against the bank.
pub fn classify_trial(trial: &Array2<f64>, bank: &TemplateBank) -> Result<CcaScore> {
    if trial.ncols() != bank.n_samples {
        return Err(Error::DimensionMismatch(format!(
            "trial has {} samples, bank expects {}",
            trial.ncols(),
            bank.n_samples
        )));
    }
    if trial.nrows() == 0 || trial.nrows() > trial.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "trial has {} channels over {} samples",
            trial.nrows(),
            trial.ncols()
        )));
    }
    let y = Whitened::new(trial);
    let rho = bank
        .prepared
        .par_iter()
        .map(|x| correlate(x, &y))
        .collect::<Result<Vec<_>>>()?;
    Ok(CcaScore::from_rho(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimgen::{reference_gait_set, CombinationId, StimulusKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
    }

    #[test]
    fn template_shapes_and_phase() {
        let t = build_template(&[12.0, 24.0], 1200.0, 7200).unwrap();
        assert_eq!(t.dim(), (4, 7200));
        let t = build_template(&[10.0], 1200.0, 1200).unwrap();
        assert_eq!(t[[0, 0]], 0.0);
        assert_eq!(t[[1, 0]], 1.0);
        // exactly ten cycles: zero crossings upward at k = 120 j
        for j in 0..10 {
            assert!(t[[0, 120 * j]].abs() < 1e-12);
        }
        let set = reference_gait_set();
        let bank = TemplateBank::new(&set, &Combination::reference_cb4(), 1200.0, 7200).unwrap();
        assert_eq!(bank.template(0).nrows(), 6);
    }

    #[test]
    fn template_errors() {
        assert!(build_template(&[600.0], 1200.0, 100).is_err());
        assert!(build_template(&[10.0, 20.0], 1200.0, 7).is_err());
        assert!(build_template(&[], 1200.0, 100).is_err());
        assert!(build_template(&[-1.0], 1200.0, 100).is_err());
    }

    #[test]
    fn identical_rows_correlate_fully() {
        let x = build_template(&[10.0, 13.0], 1200.0, 2400).unwrap();
        let rho = canonical_correlation(&x, &x.clone()).unwrap();
        assert!((rho - 1.0).abs() < 1e-9, "{rho}");
    }

    #[test]
    fn phase_shifted_sinusoid() {
        let x = build_template(&[10.0], 1200.0, 7200).unwrap();
        let mut y = noise(1, 7200, 3) * 0.05;
        for k in 0..7200 {
            y[[0, k]] += (2.0 * PI * 10.0 * k as f64 / 1200.0 + 1.234).sin();
        }
        assert!(canonical_correlation(&x, &y).unwrap() >= 0.99);
    }

    #[test]
    fn dimension_mismatch() {
        let x = build_template(&[10.0], 1200.0, 100).unwrap();
        assert!(canonical_correlation(&x, &noise(2, 99, 1)).is_err());
        assert!(canonical_correlation(&x, &noise(5, 4, 1)).is_err());
    }

    #[test]
    fn zero_trial_ties_to_first_class() {
        let set = reference_gait_set();
        let bank =
            TemplateBank::new(&set, &Combination::new(CombinationId::Cb2), 1200.0, 1200).unwrap();
        let score = classify_trial(&Array2::zeros((6, 1200)), &bank).unwrap();
        assert_eq!(score.rho, vec![0.0; 4]);
        assert_eq!(score.predicted_class, 1);
        assert_eq!(score.margin, 0.0);
    }

    #[test]
    fn rank_deficient_input_is_finite() {
        let x = build_template(&[10.0], 1200.0, 600).unwrap();
        let mut y = noise(3, 600, 9);
        let r0 = y.row(0).to_owned();
        y.row_mut(2).assign(&r0);
        let rho = canonical_correlation(&x, &y).unwrap();
        assert!(rho.is_finite() && (0.0..=1.0).contains(&rho));
    }

    #[test]
    fn tie_break_and_margin() {
        let s = CcaScore::from_rho(vec![0.2, 0.5, 0.5, 0.1]);
        assert_eq!(s.predicted_class, 2);
        assert_eq!(s.margin, 0.0);
        let s = CcaScore::from_rho(vec![0.2, 0.7, 0.5, 0.1]);
        assert_eq!(s.predicted_class, 2);
        assert!((s.margin - 0.2).abs() < 1e-15);
    }

    #[test]
    fn classify_checks_shape() {
        let set: Vec<_> = reference_gait_set()
            .into_iter()
            .map(|s| s.with_kind(StimulusKind::Flicker))
            .collect();
        let bank = TemplateBank::new(
            &set,
            &Combination::new(CombinationId::Harmonic2),
            1200.0,
            600,
        )
        .unwrap();
        assert!(classify_trial(&noise(6, 599, 2), &bank).is_err());
        assert!(classify_trial(&noise(6, 600, 2), &bank).is_ok());
    }
}
