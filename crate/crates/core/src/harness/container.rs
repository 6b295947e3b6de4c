//! On-disk dataset: a directory holding `manifest.json`, `samples.f32`
//! (little-endian `f32`, channel-major, microvolts) and optionally
//! `ground_truth.json`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::montage::is_known_label;
use crate::sigproc::{Event, Recording};
use crate::stimgen::{StimulusRecord, StimulusSpec};
use crate::synth::{synth_session, GroundTruth, SynthConfig};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SAMPLES_FILE: &str = "samples.f32";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// SHA-256 of the generating configuration's JSON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub fs_hz: f64,
    pub channel_names: Vec<String>,
    pub n_samples: usize,
    pub events: Vec<Event>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stimuli: Option<Vec<StimulusRecord>>,
}

/// Recording plus the metadata needed to analyse it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub recording: Recording,
    pub provenance: Provenance,
    pub stimuli: Option<Vec<StimulusSpec>>,
    pub truth: Option<GroundTruth>,
}

impl Dataset {
    pub fn stimulus_set(&self) -> Result<&[StimulusSpec]> {
        self.stimuli
            .as_deref()
            .ok_or_else(|| Error::MissingStimulus("dataset carries no stimulus metadata".into()))
    }

    pub fn name(&self) -> String {
        match (&self.provenance.seed, &self.provenance.note) {
            (_, Some(note)) => note.clone(),
            (Some(seed), None) => format!("seed-{seed}"),
            (None, None) => "dataset".into(),
        }
    }

    pub fn manifest(&self) -> Result<Manifest> {
        let rec = &self.recording;
        Ok(Manifest {
            format_version: FORMAT_VERSION,
            fs_hz: rec.fs_hz,
            channel_names: rec.channel_names.clone(),
            n_samples: rec.n_samples(),
            events: rec.events.clone(),
            provenance: self.provenance.clone(),
            stimuli: self
                .stimuli
                .as_ref()
                .map(|s| {
                    s.iter()
                        .map(StimulusRecord::from_spec)
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?,
        })
    }
}

pub fn config_hash(cfg: &SynthConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(json))
}

/// Generates the session described by `cfg` as a dataset.
pub fn synthesize(cfg: &SynthConfig) -> Result<Dataset> {
    let session = synth_session(cfg)?;
    Ok(Dataset {
        recording: session.recording,
        provenance: Provenance {
            seed: Some(cfg.seed),
            config_hash: Some(config_hash(cfg)),
            note: None,
        },
        stimuli: Some(cfg.stimulus_set.clone()),
        truth: Some(session.truth),
    })
}

/// Raw sample bytes as stored on disk.
pub fn encode_samples(samples: &Array2<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 * samples.len());
    for row in samples.rows() {
        for &v in row {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = dataset.manifest()?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;

    let samples_path = dir.join(SAMPLES_FILE);
    let file = fs::File::create(&samples_path).map_err(|e| Error::io(&samples_path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&encode_samples(&dataset.recording.samples))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&samples_path, e))?;

    let truth_path = dir.join(GROUND_TRUTH_FILE);
    match &dataset.truth {
        Some(truth) => {
            let text = serde_json::to_string_pretty(truth)?;
            fs::write(&truth_path, text).map_err(|e| Error::io(&truth_path, e))?;
        }
        None if truth_path.exists() => {
            fs::remove_file(&truth_path).map_err(|e| Error::io(&truth_path, e))?;
        }
        None => {}
    }
    Ok(())
}

fn validate_manifest(m: &Manifest) -> Result<()> {
    if m.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: m.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if !(m.fs_hz.is_finite() && m.fs_hz > 0.0) {
        return Err(Error::Manifest(format!(
            "fs_hz must be positive, got {}",
            m.fs_hz
        )));
    }
    if m.channel_names.is_empty() {
        return Err(Error::Manifest("no channels".into()));
    }
    if let Some(c) = m.channel_names.iter().find(|c| !is_known_label(c)) {
        return Err(Error::UnknownChannel(c.clone()));
    }
    if let Some(e) = m.events.iter().find(|e| e.sample_index >= m.n_samples) {
        return Err(Error::Manifest(format!(
            "event at sample {} beyond {} samples",
            e.sample_index, m.n_samples
        )));
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    // check the version before the rest of the schema
    if let Some(v) = value.get("format_version").and_then(|v| v.as_u64()) {
        if v != FORMAT_VERSION as u64 {
            return Err(Error::VersionMismatch {
                found: v as u32,
                expected: FORMAT_VERSION,
            });
        }
    }
    let m: Manifest = serde_json::from_value(value)?;
    validate_manifest(&m)?;
    Ok(m)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let m = read_manifest(dir)?;
    let samples_path = dir.join(SAMPLES_FILE);
    let bytes = fs::read(&samples_path).map_err(|e| Error::io(&samples_path, e))?;
    let expected = 4 * m.channel_names.len() as u64 * m.n_samples as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            found: bytes.len() as u64,
            expected,
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let samples = Array2::from_shape_vec((m.channel_names.len(), m.n_samples), values)
        .expect("length checked");
    let stimuli = m
        .stimuli
        .as_ref()
        .map(|s| {
            s.iter()
                .map(StimulusRecord::to_spec)
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let truth_path = dir.join(GROUND_TRUTH_FILE);
    let truth = if truth_path.exists() {
        let text = fs::read_to_string(&truth_path).map_err(|e| Error::io(&truth_path, e))?;
        Some(serde_json::from_str(&text)?)
    } else {
        None
    };
    Ok(Dataset {
        recording: Recording::new(samples, m.fs_hz, m.channel_names, m.events)?,
        provenance: m.provenance,
        stimuli,
        truth,
    })
}
