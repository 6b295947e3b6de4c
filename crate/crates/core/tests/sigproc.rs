mod common;

use common::{fit_amplitudes, gaussian, sine};
use gaitbci::sigproc::*;
use gaitbci::synth::{synth_session, SynthConfig};
use ndarray::Array2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FS: f64 = 1200.0;

/// Steady-state gain in dB by sinusoid injection and least-squares fit over
/// the middle of a 20 s record.
fn measured_gain_db(filter: &ZeroPhaseFilter, hz: f64) -> f64 {
    let n = 20 * FS as usize;
    let x = sine(hz, FS, n, 1.0, 0.3);
    let y = filter.apply(&x).unwrap();
    let mid = &y[5 * FS as usize..15 * FS as usize];
    let amp = fit_amplitudes(mid, &[hz], FS)[0];
    20.0 * amp.log10()
}

#[test]
fn bandpass_response_tolerances() {
    let bp = ZeroPhaseFilter::bandpass(4.0, 50.0, FS).unwrap();
    for hz in [10.0, 20.0, 40.0] {
        let g = measured_gain_db(&bp, hz);
        assert!(g.abs() <= 1.0, "{hz} Hz: {g} dB");
    }
    assert!(measured_gain_db(&bp, 1.0) <= -20.0);
    assert!(measured_gain_db(&bp, 55.0) <= -6.0);
    assert!(measured_gain_db(&bp, 60.0) <= -20.0);
}

#[test]
fn notch_response_tolerances() {
    let notch = ZeroPhaseFilter::notch(58.0, 62.0, FS).unwrap();
    assert!(measured_gain_db(&notch, 60.0) <= -20.0);
    for hz in [50.0, 70.0] {
        assert!(measured_gain_db(&notch, hz).abs() <= 1.0);
    }
    // residual amplitude at 60 Hz at most 10%
    assert!(10f64.powf(measured_gain_db(&notch, 60.0) / 20.0) <= 0.1);
}

#[test]
fn measured_gain_matches_design_response() {
    let bp = ZeroPhaseFilter::bandpass(4.0, 50.0, FS).unwrap();
    for hz in [3.0, 6.0, 25.0, 48.0, 52.0] {
        let designed = 20.0 * bp.gain(hz).log10();
        assert!(
            (measured_gain_db(&bp, hz) - designed).abs() < 0.05,
            "{hz} Hz"
        );
    }
}

#[test]
fn zero_phase_pulse_does_not_move() {
    let bp = ZeroPhaseFilter::bandpass(4.0, 50.0, FS).unwrap();
    let n = 12_000;
    let centre = 6_000.0;
    let x: Vec<f64> = (0..n)
        .map(|k| {
            let t = (k as f64 - centre) / FS;
            (-t * t / (2.0 * 0.05f64.powi(2))).exp() * (2.0 * std::f64::consts::PI * 20.0 * t).cos()
        })
        .collect();
    let y = bp.apply(&x).unwrap();
    let com = |v: &[f64]| {
        let w: f64 = v.iter().map(|a| a * a).sum();
        v.iter()
            .enumerate()
            .map(|(k, a)| k as f64 * a * a)
            .sum::<f64>()
            / w
    };
    assert!(
        (com(&y) - com(&x)).abs() < 1.0,
        "{} vs {}",
        com(&y),
        com(&x)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn filtering_is_linear(seed in any::<u64>(), a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(&mut rng, 1, 4000).row(0).to_vec();
        let y = gaussian(&mut rng, 1, 4000).row(0).to_vec();
        let bp = ZeroPhaseFilter::bandpass(4.0, 50.0, FS).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = bp.apply(&mix).unwrap();
        let fx = bp.apply(&x).unwrap();
        let fy = bp.apply(&y).unwrap();
        let scale = lhs.iter().map(|v| v.abs()).fold(1e-12, f64::max);
        for k in 0..lhs.len() {
            let rhs = a * fx[k] + b * fy[k];
            prop_assert!((lhs[k] - rhs).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn laplacian_translation_invariant(seed in any::<u64>(), c in -500.0..500.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = ["FCz", "C1", "Cz", "C2", "CPz"].iter().map(|s| s.to_string()).collect();
        let data = gaussian(&mut rng, 5, 300);
        let set = TrialSet::new(
            vec![Trial { data: data.clone(), class_label: 1, task_id: 3 }],
            FS, 0.0, names.clone(),
        ).unwrap();
        let shifted = TrialSet::new(
            vec![Trial { data: data.mapv(|v| v + c), class_label: 1, task_id: 3 }],
            FS, 0.0, names,
        ).unwrap();
        let nb = ["FCz", "C1", "C2", "CPz"];
        let a = laplacian(&set, "Cz", &nb).unwrap();
        let b = laplacian(&shifted, "Cz", &nb).unwrap();
        for (p, q) in a.trials[0].data.iter().zip(b.trials[0].data.iter()) {
            prop_assert!((p - q).abs() <= 1e-9 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn epoch_length_is_rounded_window(len_s in 0.01..5.0f64, fs in prop_oneof![Just(250.0), Just(500.0), Just(1200.0), Just(1000.0)]) {
        let n = (12.0 * fs) as usize;
        let rec = Recording::new(
            Array2::zeros((1, n)),
            fs,
            vec!["Oz".into()],
            vec![Event { sample_index: (2.0 * fs) as usize, class_label: 1, task_id: 3 }],
        ).unwrap();
        let set = extract_epochs(&rec, 0.0, len_s, 0.0).unwrap();
        prop_assert_eq!(set.n_samples(), (len_s * fs).round() as usize);
    }
}

#[test]
fn spiked_trials_are_rejected_exactly() {
    let cfg = SynthConfig {
        seed: 11,
        trials_per_class: 25,
        channels: gaitbci::montage::OCCIPITAL_CHANNELS
            .iter()
            .map(|s| s.to_string())
            .collect(),
        spike_probability: 0.2,
        ..SynthConfig::default()
    }
    .without_noise()
    .without_occipital_signal();
    let session = synth_session(&cfg).unwrap();
    let spiked = session.truth.trials.iter().filter(|t| t.spiked).count();
    let set = extract_epochs(&session.recording, 0.0, 6.0, 0.14).unwrap();
    let (kept, dropped) = reject_artifacts(&set, DEFAULT_REJECT_THRESHOLD_UV).unwrap();
    assert_eq!(dropped.len(), spiked);
    assert_eq!(kept.len(), set.len() - spiked);
    for (i, t) in session.truth.trials.iter().enumerate() {
        assert_eq!(dropped.contains(&i), t.spiked);
    }
}
