//! Ground-truth synthetic EEG.
//!
//! Occipital channels carry the steady-state response of the attended
//! target: stationary sinusoids at the target's component frequencies,
//! optionally plus a comb of stride harmonics `m * f` with amplitudes
//! decaying as `1/m`. Sensorimotor channels carry mu and beta oscillations
//! on Cz (attenuated on its neighbours) whose amplitude drops during the
//! stimulus for tasks with an ERD entry and rebounds during relaxation.
//! Every channel gets seeded `1/f` plus white background noise, part of it
//! shared across the channel group.
//!
//! Randomness is drawn from independent ChaCha streams keyed by
//! `(seed, trial index, purpose)`, so trials render identically whether
//! generated alone, in parallel, or inside a session.

pub mod noise;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montage::{
    self, ANALYSIS_BAND_HZ, CUE_S, LAPLACIAN_CENTER, MU_BETA_BAND_HZ, OCCIPITAL_CHANNELS,
    RELAXATION_S, SENSORIMOTOR_CHANNELS, STIMULUS_S, VISUAL_LATENCY_S,
};
use crate::sigproc::{task_stimulus_kind, Event, Recording};
use crate::stimgen::{reference_gait_set, Component, StimulusKind, StimulusSpec};

pub use noise::{colored_noise, NoiseConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentGain {
    pub component: Component,
    pub amplitude_uv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGain {
    pub channel: String,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OccipitalConfig {
    /// Per target: components of the gait response.
    pub gait_components: Vec<Vec<ComponentGain>>,
    /// Per target: components of the flicker/checkerboard response.
    pub ssvep_components: Vec<Vec<ComponentGain>>,
    /// Per target: amplitude of the first stride harmonic; harmonic `m`
    /// gets `harmonic_leak_uv / m`. Gait only.
    pub harmonic_leak_uv: Vec<f64>,
    pub leak_max_multiple: u32,
    pub channel_gains: Vec<ChannelGain>,
    /// Target component power over background power in the analysis band
    /// on Oz. When set, component and leak amplitudes are rescaled to hit it;
    /// with a silent background the configured amplitudes are used as is.
    pub snr_db: Option<f64>,
    /// Relative standard deviation of per-trial amplitude jitter.
    pub amplitude_jitter: f64,
    pub noise: NoiseConfig,
}

impl Default for OccipitalConfig {
    fn default() -> Self {
        use Component::*;
        let gait = |_| {
            [FrameRate, LowerSideband, UpperSideband, SecondHarmonic]
                .into_iter()
                .map(|component| ComponentGain {
                    component,
                    amplitude_uv: 1.0,
                })
                .collect()
        };
        let ssvep = |_| {
            [FrameRate, SecondHarmonic]
                .into_iter()
                .map(|component| ComponentGain {
                    component,
                    amplitude_uv: 1.0,
                })
                .collect()
        };
        let gain = |c: &str, g: f64| ChannelGain {
            channel: c.into(),
            gain: g,
        };
        OccipitalConfig {
            gait_components: (0..4).map(gait).collect(),
            ssvep_components: (0..4).map(ssvep).collect(),
            harmonic_leak_uv: vec![DEFAULT_HARMONIC_LEAK_UV; 4],
            leak_max_multiple: 16,
            channel_gains: vec![
                gain("Oz", 1.0),
                gain("POz", 0.8),
                gain("O1", 0.8),
                gain("O2", 0.8),
                gain("PO3", 0.6),
                gain("PO4", 0.6),
            ],
            snr_db: Some(0.0),
            amplitude_jitter: 0.0,
            noise: NoiseConfig {
                pink_density: 10.0,
                exponent: 1.0,
                white_sigma_uv: 1.0,
                spatial_correlation: 0.0,
            },
        }
    }
}

/// Default first-harmonic leak, relative to unit component amplitudes.
pub const DEFAULT_HARMONIC_LEAK_UV: f64 = 14.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub frequency_hz: f64,
    pub amplitude_uv: f64,
}

/// Amplitude modulation of the oscillators inside `band_hz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErdSpec {
    pub band_hz: (f64, f64),
    /// Power drop during `[onset_s, offset_s)`.
    pub depth_db: f64,
    pub onset_s: f64,
    pub offset_s: f64,
    /// Power gain from `offset_s` to the end of the trial.
    pub rebound_db: f64,
}

impl ErdSpec {
    pub fn mu_beta(depth_db: f64, rebound_db: f64) -> Self {
        ErdSpec {
            band_hz: MU_BETA_BAND_HZ,
            depth_db,
            onset_s: 0.0,
            offset_s: STIMULUS_S,
            rebound_db,
        }
    }

    fn factor(&self, t: f64, trial_end_s: f64) -> f64 {
        if t >= self.onset_s && t < self.offset_s {
            10f64.powf(-self.depth_db / 20.0)
        } else if t >= self.offset_s && t < trial_end_s {
            10f64.powf(self.rebound_db / 20.0)
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorimotorConfig {
    pub oscillators: Vec<Oscillator>,
    /// Oscillator gain on the Laplacian neighbours relative to Cz.
    pub neighbor_gain: f64,
    /// Oscillator power over background power in `snr_band_hz` on the raw
    /// Cz electrode. When set, oscillator amplitudes are rescaled to hit it;
    /// with a silent background the configured amplitudes are used as is.
    pub snr_db: Option<f64>,
    pub snr_band_hz: (f64, f64),
    pub erd: BTreeMap<u8, ErdSpec>,
    /// Amplitude of the attended target's components leaking onto Cz.
    pub stimulus_leak_uv: f64,
    pub noise: NoiseConfig,
}

impl Default for SensorimotorConfig {
    fn default() -> Self {
        let mut erd = BTreeMap::new();
        erd.insert(3, ErdSpec::mu_beta(6.0, 3.0));
        erd.insert(4, ErdSpec::mu_beta(9.0, 3.0));
        SensorimotorConfig {
            oscillators: vec![
                Oscillator {
                    frequency_hz: 10.0,
                    amplitude_uv: 1.0,
                },
                Oscillator {
                    frequency_hz: 20.0,
                    amplitude_uv: 1.0,
                },
            ],
            neighbor_gain: 0.3,
            snr_db: Some(10.0),
            snr_band_hz: MU_BETA_BAND_HZ,
            erd,
            stimulus_leak_uv: 0.0,
            noise: NoiseConfig {
                pink_density: 10.0,
                exponent: 1.0,
                white_sigma_uv: 1.0,
                spatial_correlation: 0.95,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub fs_hz: f64,
    pub stimulus_set: Vec<StimulusSpec>,
    /// Task blocks in session order.
    pub tasks: Vec<u8>,
    pub trials_per_class: usize,
    pub channels: Vec<String>,
    pub latency_s: f64,
    pub cue_s: f64,
    pub stimulus_s: f64,
    pub relaxation_s: f64,
    /// Background-only padding before the first and after the last trial.
    pub lead_s: f64,
    pub occipital: OccipitalConfig,
    pub sensorimotor: SensorimotorConfig,
    /// 60 Hz mains amplitude on every channel.
    pub line_noise_uv: f64,
    /// Chance per trial of a single-sample spike on one occipital channel.
    pub spike_probability: f64,
    pub spike_uv: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            fs_hz: montage::ACQUISITION_FS_HZ,
            stimulus_set: reference_gait_set(),
            tasks: vec![3],
            trials_per_class: 20,
            channels: montage::recorded_channel_names(),
            latency_s: VISUAL_LATENCY_S,
            cue_s: CUE_S,
            stimulus_s: STIMULUS_S,
            relaxation_s: RELAXATION_S,
            lead_s: 1.0,
            occipital: OccipitalConfig::default(),
            sensorimotor: SensorimotorConfig::default(),
            line_noise_uv: 0.0,
            spike_probability: 0.0,
            spike_uv: 500.0,
        }
    }
}

/// Half-width of the equal-power crossfade between consecutive trial segments.
const CROSSFADE_HALF_S: f64 = 0.05;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(Error::param("fs_hz", "must be positive"));
        }
        if self.stimulus_set.is_empty() {
            return Err(Error::param("stimulus_set", "at least one target required"));
        }
        for s in &self.stimulus_set {
            s.validate()?;
        }
        let k = self.stimulus_set.len();
        let occ = &self.occipital;
        if occ.gait_components.len() < k
            || occ.ssvep_components.len() < k
            || occ.harmonic_leak_uv.len() < k
        {
            return Err(Error::param(
                "occipital",
                format!("component and leak tables need {k} targets"),
            ));
        }
        for &t in &self.tasks {
            if task_stimulus_kind(t).is_none() {
                return Err(Error::param("tasks", format!("unknown task {t}")));
            }
        }
        for (name, v) in [
            ("cue_s", self.cue_s),
            ("stimulus_s", self.stimulus_s),
            ("relaxation_s", self.relaxation_s),
            ("lead_s", self.lead_s),
            ("latency_s", self.latency_s),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be non-negative, got {v}")));
            }
        }
        if self.lead_s < CROSSFADE_HALF_S {
            return Err(Error::param(
                "lead_s",
                format!("must be at least {CROSSFADE_HALF_S}"),
            ));
        }
        if !(0.0..=1.0).contains(&self.spike_probability) {
            return Err(Error::param("spike_probability", "must lie in [0, 1]"));
        }
        for n in [&occ.noise, &self.sensorimotor.noise] {
            if !(0.0..=1.0).contains(&n.spatial_correlation) {
                return Err(Error::param("spatial_correlation", "must lie in [0, 1]"));
            }
        }
        let nyquist = self.fs_hz / 2.0;
        for class in 1..=k {
            for kind in [StimulusKind::Gait, StimulusKind::Flicker] {
                for (f, _) in self.components_for(kind, class)? {
                    if f >= nyquist {
                        return Err(Error::param(
                            "stimulus_set",
                            format!("component {f} Hz of target {class} at or above Nyquist"),
                        ));
                    }
                }
            }
        }
        for o in &self.sensorimotor.oscillators {
            if !(o.frequency_hz > 0.0 && o.frequency_hz < nyquist) {
                return Err(Error::param(
                    "oscillators",
                    format!("{} Hz outside (0, Nyquist)", o.frequency_hz),
                ));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.channels {
            if !seen.insert(c.to_ascii_lowercase()) {
                return Err(Error::param("channels", format!("duplicate channel {c}")));
            }
        }
        Ok(())
    }

    /// Configured with no occipital response at all.
    pub fn without_occipital_signal(mut self) -> Self {
        self.occipital.snr_db = None;
        for row in self
            .occipital
            .gait_components
            .iter_mut()
            .chain(self.occipital.ssvep_components.iter_mut())
        {
            for c in row.iter_mut() {
                c.amplitude_uv = 0.0;
            }
        }
        for l in self.occipital.harmonic_leak_uv.iter_mut() {
            *l = 0.0;
        }
        self
    }

    pub fn without_harmonic_leak(mut self) -> Self {
        for l in self.occipital.harmonic_leak_uv.iter_mut() {
            *l = 0.0;
        }
        self
    }

    pub fn without_noise(mut self) -> Self {
        self.occipital.noise = NoiseConfig::silent();
        self.sensorimotor.noise = NoiseConfig::silent();
        self
    }

    fn spec_for(&self, kind: StimulusKind, class: usize) -> StimulusSpec {
        let s = self.stimulus_set[class - 1];
        if s.kind == kind {
            s
        } else {
            s.with_kind(kind)
        }
    }

    /// Unscaled `(frequency, amplitude)` of the target's configured components.
    fn components_for(&self, kind: StimulusKind, class: usize) -> Result<Vec<(f64, f64)>> {
        let spec = self.spec_for(kind, class);
        let table = match kind {
            StimulusKind::Gait => &self.occipital.gait_components,
            _ => &self.occipital.ssvep_components,
        };
        let row = table.get(class - 1).ok_or_else(|| {
            Error::param("occipital", format!("no components for target {class}"))
        })?;
        Ok(row
            .iter()
            .map(|c| (c.component.frequency(&spec), c.amplitude_uv))
            .collect())
    }

    /// Unscaled stride-harmonic comb; skips harmonics that coincide with a
    /// configured component or reach Nyquist.
    fn leak_for(&self, kind: StimulusKind, class: usize, comps: &[(f64, f64)]) -> Vec<(f64, f64)> {
        if kind != StimulusKind::Gait {
            return Vec::new();
        }
        let base = self.occipital.harmonic_leak_uv[class - 1];
        if base == 0.0 {
            return Vec::new();
        }
        let spec = self.spec_for(kind, class);
        (1..=self.occipital.leak_max_multiple)
            .filter_map(|m| {
                let f = spec.stride_harmonic(m);
                let clash = comps.iter().any(|&(g, _)| (g - f).abs() < 1e-9);
                (!clash && f < self.fs_hz / 2.0).then_some((f, base / m as f64))
            })
            .collect()
    }

    fn occipital_scale(&self, comps: &[(f64, f64)]) -> f64 {
        match self.occipital.snr_db {
            None => 1.0,
            Some(snr) => {
                let signal: f64 = comps.iter().map(|&(_, a)| a * a / 2.0).sum();
                if signal == 0.0 {
                    return 0.0;
                }
                let noise = self.occipital.noise.band_power(
                    ANALYSIS_BAND_HZ.0,
                    ANALYSIS_BAND_HZ.1,
                    self.fs_hz,
                );
                if noise == 0.0 {
                    return 1.0;
                }
                (10f64.powf(snr / 10.0) * noise / signal).sqrt()
            }
        }
    }

    fn smr_scale(&self) -> f64 {
        let smr = &self.sensorimotor;
        match smr.snr_db {
            None => 1.0,
            Some(snr) => {
                let signal: f64 = smr
                    .oscillators
                    .iter()
                    .map(|o| o.amplitude_uv * o.amplitude_uv / 2.0)
                    .sum();
                if signal == 0.0 {
                    return 0.0;
                }
                let noise = smr
                    .noise
                    .band_power(smr.snr_band_hz.0, smr.snr_band_hz.1, self.fs_hz);
                if noise == 0.0 {
                    return 1.0;
                }
                (10f64.powf(snr / 10.0) * noise / signal).sqrt()
            }
        }
    }

    fn trial_end_s(&self) -> f64 {
        self.stimulus_s + self.relaxation_s
    }
}

/// One sinusoid as generated (amplitude on a unit-gain channel).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub frequency_hz: f64,
    pub amplitude_uv: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTruth {
    pub trial_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_sample: Option<usize>,
    pub class_label: u8,
    pub task_id: u8,
    pub stimulus_kind: StimulusKind,
    pub components: Vec<Tone>,
    pub harmonic_leak: Vec<Tone>,
    pub oscillators: Vec<Tone>,
    pub erd_depth_db: Option<f64>,
    pub spiked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub trials: Vec<TrialTruth>,
}

fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Independent stream for `(seed, trial, purpose)`.
fn stream(seed: u64, trial_index: usize, purpose: &str) -> ChaCha8Rng {
    let mut h = 0xcbf2_9ce4_8422_2325;
    h = fnv1a(&seed.to_le_bytes(), h);
    h = fnv1a(&(trial_index as u64).to_le_bytes(), h);
    h = fnv1a(purpose.as_bytes(), h);
    ChaCha8Rng::seed_from_u64(h)
}

fn is_sensorimotor(channel: &str) -> bool {
    SENSORIMOTOR_CHANNELS
        .iter()
        .any(|c| c.eq_ignore_ascii_case(channel))
}

/// Per-trial random draws and amplitudes shared by all channels.
struct TrialPlan {
    truth: TrialTruth,
    smr_factor_spec: Option<ErdSpec>,
    leak_on_cz: Vec<Tone>,
    line_phase: f64,
    spike: Option<(usize, f64)>,
}

fn plan_trial(
    cfg: &SynthConfig,
    task_id: u8,
    class: usize,
    trial_index: usize,
) -> Result<TrialPlan> {
    if class == 0 || class > cfg.stimulus_set.len() {
        return Err(Error::param(
            "class",
            format!("{class} outside 1..={}", cfg.stimulus_set.len()),
        ));
    }
    let kind = task_stimulus_kind(task_id)
        .ok_or_else(|| Error::param("task_id", format!("unknown task {task_id}")))?;
    let comps = cfg.components_for(kind, class)?;
    let leak = cfg.leak_for(kind, class, &comps);
    let scale = cfg.occipital_scale(&comps);

    let mut phase_rng = stream(cfg.seed, trial_index, "phase");
    let mut jitter_rng = stream(cfg.seed, trial_index, "jitter");
    let mut jitter = |a: f64| {
        let j = cfg.occipital.amplitude_jitter;
        if j > 0.0 {
            a * (1.0 + j * jitter_rng.sample::<f64, _>(StandardNormal)).max(0.0)
        } else {
            a
        }
    };
    let tones = |list: &[(f64, f64)], s: f64, rng: &mut ChaCha8Rng| -> Vec<Tone> {
        list.iter()
            .map(|&(f, a)| Tone {
                frequency_hz: f,
                amplitude_uv: s * a,
                phase_rad: rng.random_range(0.0..2.0 * PI),
            })
            .collect()
    };
    let mut components = tones(&comps, scale, &mut phase_rng);
    let mut harmonic_leak = tones(&leak, scale, &mut phase_rng);
    for t in components.iter_mut().chain(harmonic_leak.iter_mut()) {
        t.amplitude_uv = jitter(t.amplitude_uv);
    }
    let smr_scale = cfg.smr_scale();
    let osc: Vec<(f64, f64)> = cfg
        .sensorimotor
        .oscillators
        .iter()
        .map(|o| (o.frequency_hz, o.amplitude_uv))
        .collect();
    let oscillators = tones(&osc, smr_scale, &mut phase_rng);
    let leak_on_cz = if cfg.sensorimotor.stimulus_leak_uv > 0.0 {
        components
            .iter()
            .map(|t| Tone {
                amplitude_uv: cfg.sensorimotor.stimulus_leak_uv,
                ..*t
            })
            .collect()
    } else {
        Vec::new()
    };
    let line_phase = stream(cfg.seed, trial_index, "line").random_range(0.0..2.0 * PI);
    let mut spike_rng = stream(cfg.seed, trial_index, "spike");
    let spike = (cfg.spike_probability > 0.0 && spike_rng.random::<f64>() < cfg.spike_probability)
        .then(|| {
            let ch = spike_rng.random_range(0..OCCIPITAL_CHANNELS.len());
            let t = cfg.latency_s + spike_rng.random_range(0.0..cfg.stimulus_s.max(1e-3));
            (ch, t)
        });
    let smr_factor_spec = cfg.sensorimotor.erd.get(&task_id).copied();
    Ok(TrialPlan {
        truth: TrialTruth {
            trial_index,
            event_sample: None,
            class_label: class as u8,
            task_id,
            stimulus_kind: kind,
            components,
            harmonic_leak,
            oscillators,
            erd_depth_db: smr_factor_spec.map(|e| e.depth_db),
            spiked: spike.is_some(),
        },
        smr_factor_spec,
        leak_on_cz,
        line_phase,
        spike,
    })
}

fn add_tones(row: &mut [f64], tones: &[Tone], gain: f64, t0: f64, fs: f64, span: (f64, f64)) {
    if gain == 0.0 || tones.is_empty() {
        return;
    }
    for (k, v) in row.iter_mut().enumerate() {
        let t = t0 + k as f64 / fs;
        if t >= span.0 && t < span.1 {
            *v += gain
                * tones
                    .iter()
                    .map(|tn| {
                        tn.amplitude_uv * (2.0 * PI * tn.frequency_hz * t + tn.phase_rad).sin()
                    })
                    .sum::<f64>();
        }
    }
}

/// Renders `channels` over `n` samples starting `t_start_s` relative to onset.
fn render(
    cfg: &SynthConfig,
    plan: &TrialPlan,
    t_start_s: f64,
    n: usize,
    channels: &[String],
) -> Array2<f64> {
    let fs = cfg.fs_hz;
    let idx = plan.truth.trial_index;
    let occ = &cfg.occipital;
    let smr = &cfg.sensorimotor;
    let group_noise = |wanted: bool, purpose: &str, ncfg: &NoiseConfig| {
        if wanted && ncfg.spatial_correlation > 0.0 {
            colored_noise(&mut stream(cfg.seed, idx, purpose), n, fs, ncfg)
        } else {
            vec![0.0; n]
        }
    };
    let any_sm = channels.iter().any(|c| is_sensorimotor(c));
    let any_occ = channels.iter().any(|c| !is_sensorimotor(c));
    let common_occ = group_noise(any_occ, "common-occipital", &occ.noise);
    let common_smr = group_noise(any_sm, "common-sensorimotor", &smr.noise);
    let stim_span = (cfg.latency_s, cfg.latency_s + cfg.stimulus_s);
    let trial_end = cfg.trial_end_s();

    let mut out = Array2::zeros((channels.len(), n));
    for (ci, name) in channels.iter().enumerate() {
        let sm = is_sensorimotor(name);
        let (ncfg, common) = if sm {
            (&smr.noise, &common_smr)
        } else {
            (&occ.noise, &common_occ)
        };
        let own = colored_noise(
            &mut stream(
                cfg.seed,
                idx,
                &format!("noise-{}", name.to_ascii_lowercase()),
            ),
            n,
            fs,
            ncfg,
        );
        let (wc, wo) = (
            ncfg.spatial_correlation.sqrt(),
            (1.0 - ncfg.spatial_correlation).sqrt(),
        );
        let mut row: Vec<f64> = common
            .iter()
            .zip(&own)
            .map(|(c, o)| wc * c + wo * o)
            .collect();

        if let Some(g) = occ
            .channel_gains
            .iter()
            .find(|g| g.channel.eq_ignore_ascii_case(name))
        {
            add_tones(
                &mut row,
                &plan.truth.components,
                g.gain,
                t_start_s,
                fs,
                stim_span,
            );
            add_tones(
                &mut row,
                &plan.truth.harmonic_leak,
                g.gain,
                t_start_s,
                fs,
                stim_span,
            );
        }
        if sm {
            let gain = if name.eq_ignore_ascii_case(LAPLACIAN_CENTER) {
                1.0
            } else {
                smr.neighbor_gain
            };
            for (k, v) in row.iter_mut().enumerate() {
                let t = t_start_s + k as f64 / fs;
                let mut acc = 0.0;
                for tn in &plan.truth.oscillators {
                    let f = match &plan.smr_factor_spec {
                        Some(e)
                            if tn.frequency_hz >= e.band_hz.0 && tn.frequency_hz <= e.band_hz.1 =>
                        {
                            e.factor(t, trial_end)
                        }
                        _ => 1.0,
                    };
                    acc +=
                        f * tn.amplitude_uv * (2.0 * PI * tn.frequency_hz * t + tn.phase_rad).sin();
                }
                *v += gain * acc;
            }
            if name.eq_ignore_ascii_case(LAPLACIAN_CENTER) {
                add_tones(&mut row, &plan.leak_on_cz, 1.0, t_start_s, fs, stim_span);
            }
        }
        if cfg.line_noise_uv > 0.0 {
            for (k, v) in row.iter_mut().enumerate() {
                let t = t_start_s + k as f64 / fs;
                *v += cfg.line_noise_uv * (2.0 * PI * 60.0 * t + plan.line_phase).sin();
            }
        }
        if let Some((sc, st)) = plan.spike {
            if name.eq_ignore_ascii_case(OCCIPITAL_CHANNELS[sc]) {
                let k = ((st - t_start_s) * fs).round();
                if k >= 0.0 && (k as usize) < n {
                    row[k as usize] += cfg.spike_uv;
                }
            }
        }
        out.row_mut(ci).assign(&ndarray::Array1::from(row));
    }
    out
}

fn occipital_names() -> Vec<String> {
    OCCIPITAL_CHANNELS.iter().map(|s| s.to_string()).collect()
}

/// Six occipital channels (PO3, POz, PO4, O1, Oz, O2) over
/// `[0, latency + stimulus)` seconds from onset, for the attended `class`
/// (1-based) of the configured stimulus set.
pub fn synth_occipital(cfg: &SynthConfig, class: usize, trial_index: usize) -> Result<Array2<f64>> {
    cfg.validate()?;
    let task = match cfg.stimulus_set.first().map(|s| s.kind) {
        Some(StimulusKind::Flicker) => 1,
        Some(StimulusKind::Checkerboard) => 2,
        _ => 3,
    };
    let plan = plan_trial(cfg, task, class, trial_index)?;
    let n = ((cfg.latency_s + cfg.stimulus_s) * cfg.fs_hz).round() as usize;
    Ok(render(cfg, &plan, 0.0, n, &occipital_names()))
}

/// Generated epoch with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthTrial {
    pub data: Array2<f64>,
    pub truth: TrialTruth,
}

/// Occipital epoch `[latency, latency + stimulus)` from onset, the window a
/// classifier sees, for any task.
pub fn synth_occipital_epoch(
    cfg: &SynthConfig,
    task_id: u8,
    class: usize,
    trial_index: usize,
) -> Result<SynthTrial> {
    cfg.validate()?;
    let plan = plan_trial(cfg, task_id, class, trial_index)?;
    let n = (cfg.stimulus_s * cfg.fs_hz).round() as usize;
    let data = render(cfg, &plan, cfg.latency_s, n, &occipital_names());
    Ok(SynthTrial {
        data,
        truth: plan.truth,
    })
}

/// FCz, C1, Cz, C2, CPz over `[-cue, stimulus + relaxation)` from onset.
pub fn synth_sensorimotor(
    cfg: &SynthConfig,
    task_id: u8,
    trial_index: usize,
) -> Result<Array2<f64>> {
    cfg.validate()?;
    let plan = plan_trial(cfg, task_id, 1, trial_index)?;
    let n = ((cfg.cue_s + cfg.trial_end_s()) * cfg.fs_hz).round() as usize;
    let names: Vec<String> = SENSORIMOTOR_CHANNELS
        .iter()
        .map(|s| s.to_string())
        .collect();
    Ok(render(cfg, &plan, -cfg.cue_s, n, &names))
}

#[derive(Debug, Clone)]
pub struct SynthSession {
    pub recording: Recording,
    pub truth: GroundTruth,
}

/// Continuous recording of every task block: per task, `trials_per_class`
/// trials of each target in seeded random order, each trial laid out as cue,
/// stimulus (event at onset) and relaxation.
pub fn synth_session(cfg: &SynthConfig) -> Result<SynthSession> {
    cfg.validate()?;
    let fs = cfg.fs_hz;
    let k_classes = cfg.stimulus_set.len();

    let mut order: Vec<(u8, usize)> = Vec::new();
    for &task in &cfg.tasks {
        let mut labels: Vec<usize> = (1..=k_classes)
            .flat_map(|c| std::iter::repeat_n(c, cfg.trials_per_class))
            .collect();
        labels.shuffle(&mut stream(cfg.seed, task as usize, "order"));
        order.extend(labels.into_iter().map(|c| (task, c)));
    }
    let n_trials = order.len();

    let samples = |t: f64| (t * fs).round() as usize;
    let lead = samples(cfg.lead_s);
    let cue = samples(cfg.cue_s);
    let period = samples(cfg.cue_s + cfg.stimulus_s + cfg.relaxation_s);
    let half = samples(CROSSFADE_HALF_S).max(1);
    let total = 2 * lead + n_trials * period;
    let starts: Vec<usize> = (0..n_trials).map(|k| lead + k * period).collect();

    let segments = order
        .par_iter()
        .enumerate()
        .map(|(k, &(task, class))| {
            let mut plan = plan_trial(cfg, task, class, k)?;
            let onset = starts[k] + cue;
            plan.truth.event_sample = Some(onset);
            let a = if k == 0 { 0 } else { starts[k] - half };
            let b = if k + 1 == n_trials {
                total
            } else {
                starts[k + 1] + half
            };
            let t0 = (a as f64 - onset as f64) / fs;
            let data = render(cfg, &plan, t0, b - a, &cfg.channels);
            Ok((a, data, plan.truth))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Array2::<f64>::zeros((cfg.channels.len(), total));
    let mut truths = Vec::with_capacity(n_trials);
    let fade = |i: usize, from: usize| {
        let x = (i - from) as f64 + 0.5;
        (PI / 2.0 * x / (2 * half) as f64).sin()
    };
    for (k, (a, data, truth)) in segments.into_iter().enumerate() {
        let len = data.ncols();
        for c in 0..data.nrows() {
            for j in 0..len {
                let i = a + j;
                let mut w = 1.0;
                if k > 0 && i < starts[k] + half {
                    w *= fade(i, starts[k] - half);
                }
                if k + 1 < n_trials && i >= starts[k + 1] - half {
                    w *= (1.0 - fade(i, starts[k + 1] - half).powi(2))
                        .max(0.0)
                        .sqrt();
                }
                out[[c, i]] += w * data[[c, j]];
            }
        }
        truths.push(truth);
    }

    let events = truths
        .iter()
        .map(|t| Event {
            sample_index: t.event_sample.expect("set above"),
            class_label: t.class_label,
            task_id: t.task_id,
        })
        .collect();
    Ok(SynthSession {
        recording: Recording::new(out, fs, cfg.channels.clone(), events)?,
        truth: GroundTruth {
            seed: cfg.seed,
            trials: truths,
        },
    })
}
