use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gaitbci::cca::{classify_trial, TemplateBank};
use gaitbci::ersp::{spectrogram, SpectrogramParams};
use gaitbci::stimgen::{reference_gait_set, Combination};
use gaitbci::synth::{synth_occipital_epoch, synth_sensorimotor, SynthConfig};
use gaitbci::ZeroPhaseFilter;
use gaitbci_bench::{occipital_epoch, test_signal, FS_HZ};

fn classify(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify_trial");
    for window_s in [1.0, 6.0] {
        let n = (window_s * FS_HZ) as usize;
        let bank = TemplateBank::new(
            &reference_gait_set(),
            &Combination::reference_cb4(),
            FS_HZ,
            n,
        )
        .unwrap();
        let trial = occipital_epoch(2).slice(ndarray::s![.., ..n]).to_owned();
        group.bench_with_input(BenchmarkId::new("cb4", window_s), &trial, |b, x| {
            b.iter(|| classify_trial(black_box(x), &bank).unwrap())
        });
    }
    group.finish();
}

fn filters(c: &mut Criterion) {
    let x = test_signal(60.0);
    let bp = ZeroPhaseFilter::bandpass(4.0, 50.0, FS_HZ).unwrap();
    let notch = ZeroPhaseFilter::notch(58.0, 62.0, FS_HZ).unwrap();
    c.bench_function("bandpass_60s", |b| {
        b.iter(|| bp.apply(black_box(&x)).unwrap())
    });
    c.bench_function("notch_60s", |b| {
        b.iter(|| notch.apply(black_box(&x)).unwrap())
    });
}

fn spectrograms(c: &mut Criterion) {
    let x = test_signal(11.9);
    let params = SpectrogramParams::default();
    c.bench_function("spectrogram_epoch", |b| {
        b.iter(|| spectrogram(black_box(&x), FS_HZ, -1.9, &params).unwrap())
    });
}

fn synth(c: &mut Criterion) {
    let cfg = SynthConfig::default();
    c.bench_function("synth_occipital_epoch", |b| {
        b.iter(|| synth_occipital_epoch(&cfg, 3, 1, black_box(5)).unwrap())
    });
    c.bench_function("synth_sensorimotor_trial", |b| {
        b.iter(|| synth_sensorimotor(&cfg, 3, black_box(5)).unwrap())
    });
}

criterion_group!(benches, classify, filters, spectrograms, synth);
criterion_main!(benches);
