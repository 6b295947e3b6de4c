//! Fixtures shared by the criterion benchmarks in `benches/`.

use gaitbci::synth::{synth_occipital_epoch, SynthConfig};
use ndarray::Array2;

pub const FS_HZ: f64 = 1200.0;

/// Six-channel 6 s occipital epoch of the default synthetic subject.
pub fn occipital_epoch(class: usize) -> Array2<f64> {
    synth_occipital_epoch(&SynthConfig::default(), 3, class, 0)
        .expect("default config is valid")
        .data
}

/// Deterministic broadband test signal of `seconds` length.
pub fn test_signal(seconds: f64) -> Vec<f64> {
    let n = (seconds * FS_HZ) as usize;
    (0..n)
        .map(|k| {
            let t = k as f64 / FS_HZ;
            (2.0 * std::f64::consts::PI * 10.0 * t).sin()
                + 0.5 * (2.0 * std::f64::consts::PI * 60.0 * t).sin()
                + ((k * 7919) % 1000) as f64 / 1000.0
                - 0.5
        })
        .collect()
}
