mod common;

use std::collections::BTreeMap;

use common::gaussian;
use gaitbci::ersp::*;
use gaitbci::sigproc::{Trial, TrialSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FS: f64 = 250.0;
const T0: f64 = -1.9;

/// Single-channel epochs over `[-1.9, 10)`: mu and beta tones whose
/// amplitude is multiplied by `task_gain` during `[0, 6)`, plus white noise.
fn step_trials(seed: u64, n_trials: usize, task_gain: f64, noise: f64) -> TrialSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (11.9 * FS) as usize;
    let trials = (0..n_trials)
        .map(|_| {
            let p1: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let p2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let w = gaussian(&mut rng, 1, n);
            let data = ndarray::Array2::from_shape_fn((1, n), |(_, k)| {
                let t = T0 + k as f64 / FS;
                let g = if (0.0..6.0).contains(&t) {
                    task_gain
                } else {
                    1.0
                };
                let tau = 2.0 * std::f64::consts::PI;
                g * (3.0 * (tau * 10.0 * t + p1).sin() + 2.0 * (tau * 20.0 * t + p2).sin())
                    + noise * w[[0, k]]
            });
            Trial {
                data,
                class_label: 1,
                task_id: 3,
            }
        })
        .collect();
    TrialSet::new(trials, FS, T0, vec!["Cz".into()]).unwrap()
}

#[test]
fn halved_amplitude_map() {
    let set = step_trials(1, 10, 0.5, 0.0);
    let map = ersp_map(&set, &SpectrogramParams::default(), (-1.9, 0.0)).unwrap();
    let rows: Vec<usize> = (0..map.freqs_hz.len())
        .filter(|&i| map.freqs_hz[i] == 10.0 || map.freqs_hz[i] == 20.0)
        .collect();
    assert_eq!(rows.len(), 2);
    for &r in &rows {
        for (c, &t) in map.times_s.iter().enumerate() {
            let v = map.power_db[r][c];
            // frames entirely inside the task window or entirely before it
            if t - 0.5 >= 0.0 && t + 0.5 <= 6.0 {
                assert!((v + 6.02).abs() < 0.1, "t {t}: {v}");
            } else if t + 0.5 <= 0.0 {
                assert!(v.abs() < 0.1, "t {t}: {v}");
            }
        }
    }
}

#[test]
fn baseline_columns_average_zero() {
    let set = step_trials(2, 15, 0.5, 1.0);
    let map = ersp_map(&set, &SpectrogramParams::default(), (-1.9, 0.0)).unwrap();
    assert!(!map.baseline_columns.is_empty());
    for row in &map.power_db {
        let m: f64 = map.baseline_columns.iter().map(|&c| row[c]).sum::<f64>()
            / map.baseline_columns.len() as f64;
        assert!(m.abs() <= 0.1, "{m}");
    }
}

#[test]
fn ers_only_task_is_plus_six() {
    let set = step_trials(3, 10, 2.0, 0.0);
    let idx = erd_index(&set, &ErdParams::default()).unwrap();
    assert!((idx.value_db - 6.02).abs() < 0.2, "{}", idx.value_db);
}

#[test]
fn identical_tasks_have_identical_indices() {
    let set = step_trials(4, 8, 0.7, 1.0);
    let per: BTreeMap<u8, TrialSet> = (1..=4).map(|t| (t, set.clone())).collect();
    let table = compare_tasks(&per, &ErdParams::default());
    assert_eq!(table.len(), 4);
    let first = table[0].index_db.unwrap();
    assert!(table.iter().all(|r| r.index_db == Some(first)));
}

#[test]
fn empty_task_reported_in_table() {
    let set = step_trials(5, 3, 0.5, 0.0);
    let mut per = BTreeMap::new();
    per.insert(1, set.clone());
    per.insert(2, TrialSet::empty(FS, T0, vec!["Cz".into()]));
    let table = compare_tasks(&per, &ErdParams::default());
    assert!(table[0].error.is_none());
    assert!(table[1].error.is_some() && table[1].index_db.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn index_scale_invariant(seed in 0u64..1000, a in 0.001..1000.0f64) {
        let set = step_trials(seed, 4, 0.6, 1.0);
        let scaled = TrialSet::new(
            set.trials.iter().map(|t| Trial { data: t.data.mapv(|v| a * v), ..t.clone() }).collect(),
            FS, T0, set.channel_names.clone(),
        ).unwrap();
        let p = ErdParams::default();
        let d = erd_index(&set, &p).unwrap().value_db - erd_index(&scaled, &p).unwrap().value_db;
        prop_assert!(d.abs() <= 1e-9);
    }

    // Per-trial log averaging biases noise-dominated cells by about -2.5 dB,
    // so the two paths only agree while the band stays well above the noise:
    // here about 16.5 dB band SNR and at most 10 dB of ERD.
    #[test]
    fn map_and_direct_paths_agree(seed in 0u64..1000, gain in 0.316..2.0f64) {
        let set = step_trials(seed, 6, gain, 1.0);
        let p = ErdParams::default();
        let direct = erd_index(&set, &p).unwrap().value_db;
        let map = ersp_map(&set, &p.spectrogram, p.baseline_window_s).unwrap();
        let via_map = map.erd_index(p.band_hz, p.task_window_s).unwrap();
        prop_assert!((direct - via_map).abs() <= 0.5, "{} vs {}", direct, via_map);
    }
}
