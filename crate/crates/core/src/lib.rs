//! Gait-like SSMVEP brain-computer interface toolkit: stimulus timing,
//! preprocessing, CCA classification, ERSP analysis, ground-truth synthetic
//! EEG and the experiment harness tying them together.

pub mod cca;
pub mod error;
pub mod ersp;
pub mod harness;
pub mod montage;
pub mod sigproc;
pub mod stimgen;
pub mod synth;

pub use cca::{
    canonical_correlation, classify_trial, evaluate, ClassificationResult, ConfusionMatrix,
    TemplateBank,
};
pub use error::{Error, Result};
pub use ersp::{erd_index, ersp_map, spectrogram, ErdIndex, ErdParams, ErspMap, SpectrogramParams};
pub use sigproc::{Event, Recording, Trial, TrialSet, ZeroPhaseFilter};
pub use stimgen::{Combination, CombinationId, Component, Position, StimulusKind, StimulusSpec};
pub use synth::{synth_session, GroundTruth, SynthConfig};
