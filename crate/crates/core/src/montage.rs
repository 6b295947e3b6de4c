//! Electrode labels and acquisition constants.

/// Amplifier sampling rate.
pub const ACQUISITION_FS_HZ: f64 = 1200.0;

/// Hardware band-pass of the amplifier. Describes the input data; never reapplied.
pub const HARDWARE_BAND_HZ: (f64, f64) = (0.1, 100.0);

/// Power-line notch band.
pub const NOTCH_BAND_HZ: (f64, f64) = (58.0, 62.0);

/// Analysis band applied before CCA and ERSP.
pub const ANALYSIS_BAND_HZ: (f64, f64) = (4.0, 50.0);

/// Visual pathway latency applied when epoching occipital data.
pub const VISUAL_LATENCY_S: f64 = 0.14;

/// Mu-beta band used for the ERD index.
pub const MU_BETA_BAND_HZ: (f64, f64) = (8.0, 26.0);

/// Baseline span relative to stimulus onset.
pub const BASELINE_WINDOW_S: (f64, f64) = (-1.9, 0.0);

pub const CUE_S: f64 = 2.0;
pub const STIMULUS_S: f64 = 6.0;
pub const RELAXATION_S: f64 = 4.0;

/// Recorded 16-channel montage, in acquisition order.
pub const RECORDED_CHANNELS: [&str; 16] = [
    "FCz", "C1", "Cz", "C2", "CPz", "F3", "F4", "PO3", "POz", "PO4", "PO7", "PO8", "O1", "Oz",
    "O2", "Iz",
];

/// Channels fed to CCA.
pub const OCCIPITAL_CHANNELS: [&str; 6] = ["PO3", "POz", "PO4", "O1", "Oz", "O2"];

/// Cz followed by its four Laplacian neighbours.
pub const SENSORIMOTOR_CHANNELS: [&str; 5] = ["FCz", "C1", "Cz", "C2", "CPz"];

pub const LAPLACIAN_CENTER: &str = "Cz";
pub const LAPLACIAN_NEIGHBORS: [&str; 4] = ["FCz", "C1", "C2", "CPz"];

/// Labels of the extended 10-20 (10-10) system accepted in dataset manifests.
const TEN_TWENTY: &[&str] = &[
    "Nz", "Fpz", "Fp1", "Fp2", "AFz", "AF3", "AF4", "AF7", "AF8", "Fz", "F1", "F2", "F3", "F4",
    "F5", "F6", "F7", "F8", "F9", "F10", "FCz", "FC1", "FC2", "FC3", "FC4", "FC5", "FC6", "FT7",
    "FT8", "FT9", "FT10", "Cz", "C1", "C2", "C3", "C4", "C5", "C6", "T7", "T8", "T9", "T10", "T3",
    "T4", "T5", "T6", "CPz", "CP1", "CP2", "CP3", "CP4", "CP5", "CP6", "TP7", "TP8", "TP9", "TP10",
    "Pz", "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9", "P10", "POz", "PO3", "PO4", "PO7",
    "PO8", "PO9", "PO10", "Oz", "O1", "O2", "O9", "O10", "Iz", "A1", "A2", "M1", "M2", "EOG",
    "HEOG", "VEOG",
];

/// Case-insensitive membership test against the 10-10 label set.
pub fn is_known_label(label: &str) -> bool {
    TEN_TWENTY.iter().any(|l| l.eq_ignore_ascii_case(label))
}

/// Index of `name` in `channels` (case-insensitive).
pub fn channel_index(channels: &[String], name: &str) -> Option<usize> {
    channels.iter().position(|c| c.eq_ignore_ascii_case(name))
}

pub fn recorded_channel_names() -> Vec<String> {
    RECORDED_CHANNELS.iter().map(|s| s.to_string()).collect()
}
