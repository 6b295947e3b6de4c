//! Default wiring from a continuous recording to analysis-ready epochs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ersp::ErdParams;
use crate::montage::{
    ANALYSIS_BAND_HZ, BASELINE_WINDOW_S, LAPLACIAN_CENTER, LAPLACIAN_NEIGHBORS, NOTCH_BAND_HZ,
    OCCIPITAL_CHANNELS, RELAXATION_S, SENSORIMOTOR_CHANNELS, STIMULUS_S, VISUAL_LATENCY_S,
};
use crate::sigproc::{
    extract_epochs_lenient, laplacian, reject_artifacts, Recording, TrialSet, ZeroPhaseFilter,
    DEFAULT_REJECT_THRESHOLD_UV,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub bandpass_hz: (f64, f64),
    pub notch_hz: Option<(f64, f64)>,
    /// Visual latency added to stimulus onsets for occipital epochs.
    pub latency_s: f64,
    pub epoch_s: f64,
    /// Peak-to-peak rejection threshold; `None` keeps every trial.
    pub reject_threshold_uv: Option<f64>,
    /// Sensorimotor epoch span around onset (no latency).
    pub sensorimotor_epoch_s: (f64, f64),
    pub erd: ErdParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bandpass_hz: ANALYSIS_BAND_HZ,
            notch_hz: Some(NOTCH_BAND_HZ),
            latency_s: VISUAL_LATENCY_S,
            epoch_s: STIMULUS_S,
            reject_threshold_uv: Some(DEFAULT_REJECT_THRESHOLD_UV),
            sensorimotor_epoch_s: (BASELINE_WINDOW_S.0, STIMULUS_S + RELAXATION_S),
            erd: ErdParams::default(),
        }
    }
}

/// Epochs with the bookkeeping of what was dropped. Indices refer to the
/// recording's event list.
#[derive(Debug, Clone)]
pub struct PreparedTrials {
    pub trials: TrialSet,
    pub out_of_bounds: Vec<usize>,
    pub artifact_rejected: Vec<usize>,
}

/// Selects `channels` and applies the band-pass and notch filters.
pub fn preprocess(
    recording: &Recording,
    channels: &[&str],
    cfg: &PipelineConfig,
) -> Result<Recording> {
    let mut rec = recording.select_channels(channels)?;
    let bp = ZeroPhaseFilter::bandpass(cfg.bandpass_hz.0, cfg.bandpass_hz.1, rec.fs_hz)?;
    rec.samples = bp.apply_rows(&rec.samples)?;
    if let Some((lo, hi)) = cfg.notch_hz {
        let notch = ZeroPhaseFilter::notch(lo, hi, rec.fs_hz)?;
        rec.samples = notch.apply_rows(&rec.samples)?;
    }
    Ok(rec)
}

fn epochs(
    recording: &Recording,
    task_id: Option<u8>,
    start_s: f64,
    len_s: f64,
    latency_s: f64,
    cfg: &PipelineConfig,
) -> Result<PreparedTrials> {
    let mut rec = recording.clone();
    let kept_events: Vec<usize> = (0..rec.events.len())
        .filter(|&i| task_id.is_none_or(|t| rec.events[i].task_id == t))
        .collect();
    rec.events = kept_events.iter().map(|&i| recording.events[i]).collect();
    let ep = extract_epochs_lenient(&rec, start_s, len_s, latency_s)?;
    let out_of_bounds: Vec<usize> = ep.rejected.iter().map(|r| kept_events[r.event]).collect();
    let in_bounds: Vec<usize> = kept_events
        .iter()
        .copied()
        .filter(|i| !out_of_bounds.contains(i))
        .collect();
    let (trials, artifact_rejected) = match cfg.reject_threshold_uv {
        Some(th) if !ep.trials.is_empty() => {
            let (kept, dropped) = reject_artifacts(&ep.trials, th)?;
            (kept, dropped.into_iter().map(|k| in_bounds[k]).collect())
        }
        _ => (ep.trials, Vec::new()),
    };
    Ok(PreparedTrials {
        trials,
        out_of_bounds,
        artifact_rejected,
    })
}

/// Filtered occipital epochs `[onset + latency, + epoch_s)`, optionally
/// restricted to one task.
pub fn occipital_trials(
    recording: &Recording,
    task_id: Option<u8>,
    cfg: &PipelineConfig,
) -> Result<PreparedTrials> {
    let rec = preprocess(recording, &OCCIPITAL_CHANNELS, cfg)?;
    epochs(&rec, task_id, 0.0, cfg.epoch_s, cfg.latency_s, cfg)
}

/// Filtered sensorimotor epochs reduced to the Cz Laplacian. Artifact
/// rejection looks at all five channels.
pub fn sensorimotor_trials(
    recording: &Recording,
    task_id: Option<u8>,
    cfg: &PipelineConfig,
) -> Result<PreparedTrials> {
    channel_trials(recording, LAPLACIAN_CENTER, true, task_id, cfg)
}

/// Single-channel epochs over the sensorimotor span. With `laplacian_ref`
/// the channel must be the Laplacian centre and its neighbours are
/// subtracted after rejection.
pub fn channel_trials(
    recording: &Recording,
    channel: &str,
    laplacian_ref: bool,
    task_id: Option<u8>,
    cfg: &PipelineConfig,
) -> Result<PreparedTrials> {
    let (start, end) = cfg.sensorimotor_epoch_s;
    if laplacian_ref {
        if !channel.eq_ignore_ascii_case(LAPLACIAN_CENTER) {
            return Err(Error::param(
                "channel",
                format!("the Laplacian is defined around {LAPLACIAN_CENTER}, not {channel}"),
            ));
        }
        let rec = preprocess(recording, &SENSORIMOTOR_CHANNELS, cfg)?;
        let mut prepared = epochs(&rec, task_id, start, end - start, 0.0, cfg)?;
        prepared.trials = laplacian(&prepared.trials, LAPLACIAN_CENTER, &LAPLACIAN_NEIGHBORS)?;
        return Ok(prepared);
    }
    let rec = preprocess(recording, &[channel], cfg)?;
    epochs(&rec, task_id, start, end - start, 0.0, cfg)
}
