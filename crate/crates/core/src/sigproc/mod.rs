//! Recordings, epochs and the preprocessing chain: zero-phase band-pass and
//! notch filtering, event-locked epoch extraction, the Cz surface Laplacian,
//! and peak-to-peak trial rejection.

pub mod filter;

use ndarray::{s, Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montage::channel_index;
use crate::stimgen::StimulusKind;

pub use filter::{Biquad, ZeroPhaseFilter};

/// Default peak-to-peak rejection threshold.
pub const DEFAULT_REJECT_THRESHOLD_UV: f64 = 100.0;

/// Mental task of a trial: 1 flicker, 2 checkerboard, 3 gait observation,
/// 4 gait observation with walking imagery.
pub fn task_stimulus_kind(task_id: u8) -> Option<StimulusKind> {
    match task_id {
        1 => Some(StimulusKind::Flicker),
        2 => Some(StimulusKind::Checkerboard),
        3 | 4 => Some(StimulusKind::Gait),
        _ => None,
    }
}

/// Stimulus onset marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub sample_index: usize,
    /// Attended target, 1-based.
    pub class_label: u8,
    pub task_id: u8,
}

impl Event {
    pub fn stimulus_kind(&self) -> Option<StimulusKind> {
        task_stimulus_kind(self.task_id)
    }
}

/// Continuous multichannel EEG in microvolts, channels x samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub samples: Array2<f64>,
    pub fs_hz: f64,
    pub channel_names: Vec<String>,
    pub events: Vec<Event>,
}

impl Recording {
    pub fn new(
        samples: Array2<f64>,
        fs_hz: f64,
        channel_names: Vec<String>,
        mut events: Vec<Event>,
    ) -> Result<Self> {
        if samples.nrows() != channel_names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} channel names for {} rows",
                channel_names.len(),
                samples.nrows()
            )));
        }
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(Error::param(
                "fs_hz",
                format!("must be positive, got {fs_hz}"),
            ));
        }
        events.sort_by_key(|e| e.sample_index);
        Ok(Recording {
            samples,
            fs_hz,
            channel_names,
            events,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.samples.ncols()
    }

    pub fn channel(&self, name: &str) -> Result<usize> {
        channel_index(&self.channel_names, name).ok_or_else(|| Error::MissingChannel(name.into()))
    }

    /// Copy restricted to `names`, in the given order.
    pub fn select_channels(&self, names: &[&str]) -> Result<Recording> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.channel(n))
            .collect::<Result<_>>()?;
        Ok(Recording {
            samples: self.samples.select(Axis(0), &idx),
            fs_hz: self.fs_hz,
            channel_names: idx.iter().map(|&i| self.channel_names[i].clone()).collect(),
            events: self.events.clone(),
        })
    }

    fn with_filter(&self, filter: &ZeroPhaseFilter) -> Result<Recording> {
        Ok(Recording {
            samples: filter.apply_rows(&self.samples)?,
            fs_hz: self.fs_hz,
            channel_names: self.channel_names.clone(),
            events: self.events.clone(),
        })
    }
}

/// One epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// channels x samples
    pub data: Array2<f64>,
    pub class_label: u8,
    pub task_id: u8,
}

/// Equal-shape epochs with shared timing and montage.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub trials: Vec<Trial>,
    pub fs_hz: f64,
    /// Time of the first epoch sample relative to stimulus onset.
    pub t0_offset_s: f64,
    pub channel_names: Vec<String>,
}

impl TrialSet {
    pub fn empty(fs_hz: f64, t0_offset_s: f64, channel_names: Vec<String>) -> Self {
        TrialSet {
            trials: Vec::new(),
            fs_hz,
            t0_offset_s,
            channel_names,
        }
    }

    /// Builds a set, checking that all trials share one shape matching the montage.
    pub fn new(
        trials: Vec<Trial>,
        fs_hz: f64,
        t0_offset_s: f64,
        channel_names: Vec<String>,
    ) -> Result<Self> {
        if let Some(first) = trials.first() {
            let shape = first.data.dim();
            if shape.0 != channel_names.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} channel names for {}-channel trials",
                    channel_names.len(),
                    shape.0
                )));
            }
            if let Some(bad) = trials.iter().position(|t| t.data.dim() != shape) {
                return Err(Error::DimensionMismatch(format!(
                    "trial {bad} has shape {:?}, expected {shape:?}",
                    trials[bad].data.dim()
                )));
            }
        }
        Ok(TrialSet {
            trials,
            fs_hz,
            t0_offset_s,
            channel_names,
        })
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.trials.first().map_or(0, |t| t.data.ncols())
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.fs_hz
    }

    /// Epoch time of sample `k`.
    pub fn time_of(&self, k: usize) -> f64 {
        self.t0_offset_s + k as f64 / self.fs_hz
    }

    pub fn channel(&self, name: &str) -> Result<usize> {
        channel_index(&self.channel_names, name).ok_or_else(|| Error::MissingChannel(name.into()))
    }

    fn map_trials<F>(&self, channel_names: Vec<String>, f: F) -> Result<TrialSet>
    where
        F: Fn(&Array2<f64>) -> Result<Array2<f64>> + Sync,
    {
        let trials = self
            .trials
            .par_iter()
            .map(|t| {
                Ok(Trial {
                    data: f(&t.data)?,
                    class_label: t.class_label,
                    task_id: t.task_id,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrialSet {
            trials,
            fs_hz: self.fs_hz,
            t0_offset_s: self.t0_offset_s,
            channel_names,
        })
    }

    pub fn select_channels(&self, names: &[&str]) -> Result<TrialSet> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.channel(n))
            .collect::<Result<_>>()?;
        let kept = idx.iter().map(|&i| self.channel_names[i].clone()).collect();
        self.map_trials(kept, |d| Ok(d.select(Axis(0), &idx)))
    }

    pub fn filter(&self, filter: &ZeroPhaseFilter) -> Result<TrialSet> {
        self.map_trials(self.channel_names.clone(), |d| filter.apply_rows(d))
    }

    /// First `n_samples` of every epoch.
    pub fn truncate(&self, n_samples: usize) -> Result<TrialSet> {
        if n_samples > self.n_samples() && !self.is_empty() {
            return Err(Error::param(
                "window",
                format!(
                    "{n_samples} samples requested from {}-sample epochs",
                    self.n_samples()
                ),
            ));
        }
        self.map_trials(self.channel_names.clone(), |d| {
            Ok(d.slice(s![.., ..n_samples]).to_owned())
        })
    }

    /// Distinct task ids present, ascending.
    pub fn task_ids(&self) -> Vec<u8> {
        let mut ids: Vec<u8> = self.trials.iter().map(|t| t.task_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Trials of one task, order preserved.
    pub fn with_task(&self, task_id: u8) -> TrialSet {
        TrialSet {
            trials: self
                .trials
                .iter()
                .filter(|t| t.task_id == task_id)
                .cloned()
                .collect(),
            fs_hz: self.fs_hz,
            t0_offset_s: self.t0_offset_s,
            channel_names: self.channel_names.clone(),
        }
    }

    pub fn labels(&self) -> Vec<u8> {
        self.trials.iter().map(|t| t.class_label).collect()
    }
}

pub fn bandpass(recording: &Recording, lo_hz: f64, hi_hz: f64) -> Result<Recording> {
    recording.with_filter(&ZeroPhaseFilter::bandpass(lo_hz, hi_hz, recording.fs_hz)?)
}

pub fn notch(recording: &Recording, lo_hz: f64, hi_hz: f64) -> Result<Recording> {
    recording.with_filter(&ZeroPhaseFilter::notch(lo_hz, hi_hz, recording.fs_hz)?)
}

/// `round(t * fs)`, halves away from zero.
pub fn seconds_to_samples(t_s: f64, fs_hz: f64) -> i64 {
    (t_s * fs_hz).round() as i64
}

/// An event whose epoch could not be cut.
#[derive(Debug)]
pub struct EpochRejection {
    pub event: usize,
    pub error: Error,
}

/// Epochs with their rejected events.
#[derive(Debug)]
pub struct Epochs {
    pub trials: TrialSet,
    pub rejected: Vec<EpochRejection>,
}

/// Cuts `[onset + round((start + latency) fs), + round(len fs))` around every
/// event. Events whose window leaves the recording are returned in
/// `rejected` with their bounds error.
pub fn extract_epochs_lenient(
    recording: &Recording,
    window_start_s: f64,
    window_len_s: f64,
    latency_s: f64,
) -> Result<Epochs> {
    if !(window_len_s.is_finite() && window_len_s > 0.0) {
        return Err(Error::param(
            "window_len_s",
            format!("must be positive, got {window_len_s}"),
        ));
    }
    let fs = recording.fs_hz;
    let offset = seconds_to_samples(window_start_s + latency_s, fs);
    let len = seconds_to_samples(window_len_s, fs);
    let total = recording.n_samples();
    let mut trials = Vec::with_capacity(recording.events.len());
    let mut rejected = Vec::new();
    for (i, ev) in recording.events.iter().enumerate() {
        let start = ev.sample_index as i64 + offset;
        let end = start + len;
        if start < 0 || end > total as i64 {
            rejected.push(EpochRejection {
                event: i,
                error: Error::EpochOutOfBounds {
                    event: i,
                    sample_index: ev.sample_index,
                    start,
                    end,
                    len: total,
                },
            });
            continue;
        }
        trials.push(Trial {
            data: recording
                .samples
                .slice(s![.., start as usize..end as usize])
                .to_owned(),
            class_label: ev.class_label,
            task_id: ev.task_id,
        });
    }
    Ok(Epochs {
        trials: TrialSet {
            trials,
            fs_hz: fs,
            t0_offset_s: window_start_s + latency_s,
            channel_names: recording.channel_names.clone(),
        },
        rejected,
    })
}

/// As [`extract_epochs_lenient`], failing on the first out-of-bounds event.
pub fn extract_epochs(
    recording: &Recording,
    window_start_s: f64,
    window_len_s: f64,
    latency_s: f64,
) -> Result<TrialSet> {
    let mut epochs = extract_epochs_lenient(recording, window_start_s, window_len_s, latency_s)?;
    if !epochs.rejected.is_empty() {
        return Err(epochs.rejected.swap_remove(0).error);
    }
    Ok(epochs.trials)
}

/// `center(t) - mean(neighbors(t))` as a single-channel set named after the center.
pub fn laplacian(trials: &TrialSet, center: &str, neighbors: &[&str]) -> Result<TrialSet> {
    if neighbors.is_empty() {
        return Err(Error::param("neighbors", "at least one neighbour required"));
    }
    let c = trials.channel(center)?;
    let nb: Vec<usize> = neighbors
        .iter()
        .map(|n| trials.channel(n))
        .collect::<Result<_>>()?;
    let w = 1.0 / nb.len() as f64;
    let name = trials.channel_names[c].clone();
    trials.map_trials(vec![name], |d| {
        let mut out = d.row(c).to_owned();
        for &i in &nb {
            out.scaled_add(-w, &d.row(i));
        }
        Ok(out.insert_axis(Axis(0)))
    })
}

/// Largest peak-to-peak amplitude over the channels of one epoch.
pub fn peak_to_peak(data: &Array2<f64>) -> f64 {
    data.axis_iter(Axis(0))
        .map(|row| {
            let (lo, hi) = row
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Drops trials whose peak-to-peak amplitude on any channel exceeds the
/// threshold. Returns the kept set and the original indices of the dropped trials.
pub fn reject_artifacts(trials: &TrialSet, threshold_uv: f64) -> Result<(TrialSet, Vec<usize>)> {
    if threshold_uv.is_nan() || threshold_uv <= 0.0 {
        return Err(Error::param(
            "threshold_uv",
            format!("must be positive, got {threshold_uv}"),
        ));
    }
    let mut kept = Vec::with_capacity(trials.len());
    let mut rejected = Vec::new();
    for (i, t) in trials.trials.iter().enumerate() {
        if peak_to_peak(&t.data) > threshold_uv {
            rejected.push(i);
        } else {
            kept.push(t.clone());
        }
    }
    Ok((
        TrialSet {
            trials: kept,
            fs_hz: trials.fs_hz,
            t0_offset_s: trials.t0_offset_s,
            channel_names: trials.channel_names.clone(),
        },
        rejected,
    ))
}
