//! Time-frequency analysis of a single sensorimotor channel.
//!
//! Spectrograms use a periodic Hann taper, one-sided power spectral density
//! scaling, and time stamps at window centers relative to stimulus onset.
//! A frame belongs to a time window when its whole taper support lies
//! inside that window, so baseline and task estimates never mix.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montage::{BASELINE_WINDOW_S, MU_BETA_BAND_HZ, STIMULUS_S};
use crate::sigproc::TrialSet;

/// Log-power floor relative to the largest power in a trial.
pub const POWER_FLOOR_RELATIVE: f64 = 1e-12;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramParams {
    pub window_s: f64,
    pub hop_s: f64,
    pub freq_range_hz: (f64, f64),
}

impl Default for SpectrogramParams {
    fn default() -> Self {
        SpectrogramParams {
            window_s: 1.0,
            hop_s: 0.05,
            freq_range_hz: (4.0, 50.0),
        }
    }
}

/// Linear power spectral density, frequency x time.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub freqs_hz: Vec<f64>,
    pub times_s: Vec<f64>,
    pub power: Array2<f64>,
    pub window_s: f64,
}

impl Spectrogram {
    /// `10 log10(max(p, floor))` with the floor tied to the largest power.
    pub fn to_db(&self) -> Array2<f64> {
        let peak = self.power.iter().cloned().fold(0.0, f64::max);
        let floor = if peak > 0.0 {
            POWER_FLOOR_RELATIVE * peak
        } else {
            f64::MIN_POSITIVE
        };
        self.power.mapv(|p| 10.0 * p.max(floor).log10())
    }

    /// Frames whose taper support lies inside `[t0, t1]`.
    pub fn frames_within(&self, window_s: (f64, f64)) -> Vec<usize> {
        frames_within(&self.times_s, self.window_s, window_s)
    }

    pub fn bins_within(&self, band_hz: (f64, f64)) -> Vec<usize> {
        bins_within(&self.freqs_hz, band_hz)
    }
}

fn frames_within(times: &[f64], win: f64, (t0, t1): (f64, f64)) -> Vec<usize> {
    times
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c - win / 2.0 >= t0 - TIME_EPS && c + win / 2.0 <= t1 + TIME_EPS)
        .map(|(i, _)| i)
        .collect()
}

fn bins_within(freqs: &[f64], (lo, hi): (f64, f64)) -> Vec<usize> {
    freqs
        .iter()
        .enumerate()
        .filter(|&(_, &f)| f >= lo - 1e-9 && f <= hi + 1e-9)
        .map(|(i, _)| i)
        .collect()
}

/// Short-time power spectrum of one channel. `t0_offset_s` is the time of
/// the first sample relative to stimulus onset.
pub fn spectrogram(
    signal: &[f64],
    fs_hz: f64,
    t0_offset_s: f64,
    params: &SpectrogramParams,
) -> Result<Spectrogram> {
    let win = (params.window_s * fs_hz).round() as usize;
    let hop = (params.hop_s * fs_hz).round() as usize;
    if win < 2 || hop == 0 {
        return Err(Error::param(
            "window",
            format!("degenerate window/hop: {win}/{hop} samples"),
        ));
    }
    if signal.len() < win {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            required: win,
        });
    }
    let (lo, hi) = params.freq_range_hz;
    if !(lo >= 0.0 && lo < hi && hi <= fs_hz / 2.0) {
        return Err(Error::param(
            "freq_range_hz",
            format!("need 0 <= lo < hi <= fs/2, got [{lo}, {hi}]"),
        ));
    }

    let taper: Vec<f64> = (0..win)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / win as f64).cos())
        .collect();
    let taper_energy: f64 = taper.iter().map(|w| w * w).sum();
    let df = fs_hz / win as f64;
    let bins: Vec<usize> = (0..=win / 2)
        .filter(|&k| {
            let f = k as f64 * df;
            f >= lo - 1e-9 && f <= hi + 1e-9
        })
        .collect();
    let freqs_hz: Vec<f64> = bins.iter().map(|&k| k as f64 * df).collect();
    let n_frames = (signal.len() - win) / hop + 1;
    let times_s: Vec<f64> = (0..n_frames)
        .map(|j| t0_offset_s + (j * hop) as f64 / fs_hz + params.window_s / 2.0)
        .collect();

    let fft = FftPlanner::new().plan_fft_forward(win);
    let mut buf = vec![Complex::new(0.0, 0.0); win];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut power = Array2::zeros((bins.len(), n_frames));
    for j in 0..n_frames {
        let seg = &signal[j * hop..j * hop + win];
        for (b, (&x, &w)) in buf.iter_mut().zip(seg.iter().zip(&taper)) {
            *b = Complex::new(x * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (row, &k) in bins.iter().enumerate() {
            let one_sided = if k == 0 || 2 * k == win { 1.0 } else { 2.0 };
            power[[row, j]] = one_sided * buf[k].norm_sqr() / (fs_hz * taper_energy);
        }
    }
    Ok(Spectrogram {
        freqs_hz,
        times_s,
        power,
        window_s: params.window_s,
    })
}

fn single_channel(trials: &TrialSet) -> Result<()> {
    if trials.is_empty() {
        return Err(Error::Empty("trial set".into()));
    }
    if trials.channel_names.len() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected one channel, got {}",
            trials.channel_names.len()
        )));
    }
    Ok(())
}

fn trial_spectrograms(trials: &TrialSet, params: &SpectrogramParams) -> Result<Vec<Spectrogram>> {
    single_channel(trials)?;
    trials
        .trials
        .par_iter()
        .map(|t| {
            let row = t.data.row(0).to_vec();
            spectrogram(&row, trials.fs_hz, trials.t0_offset_s, params)
        })
        .collect()
}

/// Trial-averaged baseline-normalized log spectrogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErspMap {
    pub freqs_hz: Vec<f64>,
    pub times_s: Vec<f64>,
    /// Frequency rows of dB values relative to baseline.
    pub power_db: Vec<Vec<f64>>,
    pub n_trials: usize,
    pub baseline_window_s: (f64, f64),
    /// Columns used as baseline.
    pub baseline_columns: Vec<usize>,
    /// Per frequency row, the trial-averaged baseline log power that was
    /// subtracted.
    pub baseline_db: Vec<f64>,
    pub window_s: f64,
}

impl ErspMap {
    /// Flat `freq_hz,time_s,db` table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "freq_hz,time_s,db")?;
        for (f, row) in self.freqs_hz.iter().zip(&self.power_db) {
            for (t, v) in self.times_s.iter().zip(row) {
                writeln!(out, "{f},{t},{v}")?;
            }
        }
        Ok(())
    }

    /// ERD index recomputed from the linear-power equivalents of the map cells.
    pub fn erd_index(&self, band_hz: (f64, f64), task_window_s: (f64, f64)) -> Result<f64> {
        let bins = bins_within(&self.freqs_hz, band_hz);
        let task = frames_within(&self.times_s, self.window_s, task_window_s);
        if bins.is_empty() || task.is_empty() || self.baseline_columns.is_empty() {
            return Err(Error::param(
                "window",
                "band or task window selects no cells",
            ));
        }
        let mean_lin = |cols: &[usize]| {
            let mut acc = 0.0;
            for &b in &bins {
                for &c in cols {
                    acc += 10f64.powf((self.power_db[b][c] + self.baseline_db[b]) / 10.0);
                }
            }
            acc / (bins.len() * cols.len()) as f64
        };
        Ok(10.0 * (mean_lin(&task) / mean_lin(&self.baseline_columns)).log10())
    }
}

fn check_baseline(trials: &TrialSet, baseline_s: (f64, f64)) -> Result<()> {
    if trials.t0_offset_s > baseline_s.0 + 1.0 / trials.fs_hz + TIME_EPS {
        return Err(Error::param(
            "baseline",
            format!(
                "epochs start at {} s, baseline needs {} s",
                trials.t0_offset_s, baseline_s.0
            ),
        ));
    }
    Ok(())
}

/// Per trial, subtracts the mean baseline log power of each frequency row,
/// then averages across trials.
pub fn ersp_map(
    trials: &TrialSet,
    params: &SpectrogramParams,
    baseline_s: (f64, f64),
) -> Result<ErspMap> {
    single_channel(trials)?;
    check_baseline(trials, baseline_s)?;
    let specs = trial_spectrograms(trials, params)?;
    let first = &specs[0];
    let baseline = first.frames_within(baseline_s);
    if baseline.is_empty() {
        return Err(Error::param(
            "baseline",
            format!(
                "no {} s analysis window fits inside baseline {:?}",
                params.window_s, baseline_s
            ),
        ));
    }
    let (nf, nt) = first.power.dim();
    let mut sum = Array2::<f64>::zeros((nf, nt));
    let mut baseline_db = vec![0.0; nf];
    for spec in &specs {
        let mut db = spec.to_db();
        for (mut row, acc) in db.rows_mut().into_iter().zip(baseline_db.iter_mut()) {
            let base = baseline.iter().map(|&c| row[c]).sum::<f64>() / baseline.len() as f64;
            row -= base;
            *acc += base;
        }
        sum += &db;
    }
    sum /= specs.len() as f64;
    for b in baseline_db.iter_mut() {
        *b /= specs.len() as f64;
    }
    Ok(ErspMap {
        freqs_hz: first.freqs_hz.clone(),
        times_s: first.times_s.clone(),
        power_db: sum.rows().into_iter().map(|r| r.to_vec()).collect(),
        n_trials: specs.len(),
        baseline_window_s: baseline_s,
        baseline_columns: baseline,
        baseline_db,
        window_s: params.window_s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErdIndex {
    pub value_db: f64,
    pub band_hz: (f64, f64),
    pub task_window_s: (f64, f64),
    pub baseline_window_s: (f64, f64),
    /// Mean linear band power over the task window.
    pub task_power: f64,
    /// Mean linear band power over the baseline.
    pub baseline_power: f64,
    /// Index of each trial on its own.
    pub per_trial_db: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErdParams {
    pub band_hz: (f64, f64),
    pub task_window_s: (f64, f64),
    pub baseline_window_s: (f64, f64),
    pub spectrogram: SpectrogramParams,
}

impl Default for ErdParams {
    fn default() -> Self {
        ErdParams {
            band_hz: MU_BETA_BAND_HZ,
            task_window_s: (0.0, STIMULUS_S),
            baseline_window_s: BASELINE_WINDOW_S,
            spectrogram: SpectrogramParams::default(),
        }
    }
}

/// `10 log10(P / R)` with `P` and `R` the linear band power averaged over
/// trials, frames and frequency bins of the task and baseline windows.
pub fn erd_index(trials: &TrialSet, params: &ErdParams) -> Result<ErdIndex> {
    single_channel(trials)?;
    check_baseline(trials, params.baseline_window_s)?;
    let specs = trial_spectrograms(trials, &params.spectrogram)?;
    let first = &specs[0];
    let bins = first.bins_within(params.band_hz);
    let task = first.frames_within(params.task_window_s);
    let base = first.frames_within(params.baseline_window_s);
    if bins.is_empty() {
        return Err(Error::param(
            "band_hz",
            format!("{:?} holds no frequency bins", params.band_hz),
        ));
    }
    if task.is_empty() || base.is_empty() {
        return Err(Error::param(
            "window",
            "task or baseline window holds no complete analysis frame",
        ));
    }
    let mean = |s: &Spectrogram, cols: &[usize]| {
        let mut acc = 0.0;
        for &b in &bins {
            for &c in cols {
                acc += s.power[[b, c]];
            }
        }
        acc / (bins.len() * cols.len()) as f64
    };
    let per: Vec<(f64, f64)> = specs
        .iter()
        .map(|s| (mean(s, &task), mean(s, &base)))
        .collect();
    let p = per.iter().map(|x| x.0).sum::<f64>() / per.len() as f64;
    let r = per.iter().map(|x| x.1).sum::<f64>() / per.len() as f64;
    if r.is_nan() || r <= 0.0 {
        return Err(Error::DegenerateBaseline);
    }
    let per_trial_db = per
        .iter()
        .map(|&(pt, rt)| {
            if rt > 0.0 && pt > 0.0 {
                10.0 * (pt / rt).log10()
            } else {
                f64::NAN
            }
        })
        .collect();
    Ok(ErdIndex {
        value_db: 10.0 * (p / r).log10(),
        band_hz: params.band_hz,
        task_window_s: params.task_window_s,
        baseline_window_s: params.baseline_window_s,
        task_power: p,
        baseline_power: r,
        per_trial_db,
    })
}

/// One task's row of an ERD comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskErd {
    pub task_id: u8,
    pub n_trials: usize,
    pub index_db: Option<f64>,
    /// Mean of per-trial indices.
    pub mean_trial_db: Option<f64>,
    /// Sample standard deviation of per-trial indices.
    pub sd_trial_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// `task_id,n_trials,index_db,mean_trial_db,sd_trial_db,error` rows; missing
/// values are empty fields.
pub fn write_task_table_csv<W: Write>(rows: &[TaskErd], mut out: W) -> std::io::Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    writeln!(
        out,
        "task_id,n_trials,index_db,mean_trial_db,sd_trial_db,error"
    )?;
    for r in rows {
        let err = r.error.as_deref().unwrap_or("").replace(['"', ','], " ");
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.task_id,
            r.n_trials,
            opt(r.index_db),
            opt(r.mean_trial_db),
            opt(r.sd_trial_db),
            err
        )?;
    }
    Ok(())
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// ERD index per task id, ascending. Tasks whose set is empty or fails carry
/// the error instead of an index.
pub fn compare_tasks(per_task: &BTreeMap<u8, TrialSet>, params: &ErdParams) -> Vec<TaskErd> {
    per_task
        .iter()
        .map(|(&task_id, set)| {
            let n_trials = set.len();
            let result = if set.is_empty() {
                Err(Error::Empty(format!("task {task_id} has no trials")))
            } else {
                erd_index(set, params)
            };
            match result {
                Ok(idx) => {
                    let finite: Vec<f64> = idx
                        .per_trial_db
                        .iter()
                        .cloned()
                        .filter(|v| v.is_finite())
                        .collect();
                    let (m, sd) = mean_sd(&finite);
                    TaskErd {
                        task_id,
                        n_trials,
                        index_db: Some(idx.value_db),
                        mean_trial_db: Some(m),
                        sd_trial_db: Some(sd),
                        error: None,
                    }
                }
                Err(e) => TaskErd {
                    task_id,
                    n_trials,
                    index_db: None,
                    mean_trial_db: None,
                    sd_trial_db: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigproc::Trial;

    const FS: f64 = 1200.0;

    fn tone(hz: f64, amp: impl Fn(f64) -> f64, t0: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| {
                let t = t0 + k as f64 / FS;
                amp(t) * (2.0 * PI * hz * t).sin()
            })
            .collect()
    }

    fn set_of(signals: Vec<Vec<f64>>, t0: f64) -> TrialSet {
        let trials = signals
            .into_iter()
            .map(|s| Trial {
                data: Array2::from_shape_vec((1, s.len()), s).unwrap(),
                class_label: 1,
                task_id: 3,
            })
            .collect();
        TrialSet::new(trials, FS, t0, vec!["Cz".into()]).unwrap()
    }

    #[test]
    fn stationary_tone() {
        let x = tone(20.0, |_| 1.0, 0.0, 6 * 1200);
        let s = spectrogram(&x, FS, 0.0, &SpectrogramParams::default()).unwrap();
        let db = s.to_db();
        let peak_row = s.freqs_hz.iter().position(|&f| f == 20.0).unwrap();
        for j in 0..s.times_s.len() {
            let col: Vec<f64> = (0..s.freqs_hz.len()).map(|i| db[[i, j]]).collect();
            let argmax = col
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert_eq!(argmax, peak_row);
            assert!((db[[peak_row, j]] - db[[peak_row, 0]]).abs() < 0.5);
        }
        // band power integrates to A^2 / 2
        let df = s.freqs_hz[1] - s.freqs_hz[0];
        let total: f64 = (0..s.freqs_hz.len()).map(|i| s.power[[i, 0]]).sum::<f64>() * df;
        assert!((total - 0.5).abs() < 1e-9, "{total}");
        assert!((s.times_s[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn amplitude_step_drops_six_db() {
        let x = tone(20.0, |t| if t < 3.0 { 1.0 } else { 0.5 }, 0.0, 6 * 1200);
        let s = spectrogram(&x, FS, 0.0, &SpectrogramParams::default()).unwrap();
        let bins = s.bins_within((15.0, 25.0));
        let band = |cols: Vec<usize>| {
            let mut acc = 0.0;
            for &b in &bins {
                for &c in &cols {
                    acc += s.power[[b, c]];
                }
            }
            acc / cols.len() as f64
        };
        let before = band(s.frames_within((0.0, 3.0)));
        let after = band(s.frames_within((3.0, 6.0)));
        let drop = 10.0 * (after / before).log10();
        assert!((drop + 20.0 * 2f64.log10()).abs() < 0.05, "{drop}");
    }

    #[test]
    fn zero_signal_is_floored() {
        let s = spectrogram(&vec![0.0; 2400], FS, 0.0, &SpectrogramParams::default()).unwrap();
        let db = s.to_db();
        assert!(db.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn degenerate_windows() {
        let p = SpectrogramParams {
            hop_s: 0.0,
            ..SpectrogramParams::default()
        };
        assert!(spectrogram(&vec![0.0; 2400], FS, 0.0, &p).is_err());
        assert!(spectrogram(&vec![0.0; 100], FS, 0.0, &SpectrogramParams::default()).is_err());
    }

    #[test]
    fn flat_trials_give_flat_map() {
        let n = (11.9 * FS) as usize;
        let trials: Vec<Vec<f64>> = (0..3)
            .map(|i| tone(10.0 + i as f64, |_| 1.0, -1.9, n))
            .collect();
        let map = ersp_map(
            &set_of(trials, -1.9),
            &SpectrogramParams::default(),
            BASELINE_WINDOW_S,
        )
        .unwrap();
        let r10 = map.freqs_hz.iter().position(|&f| f == 10.0).unwrap();
        assert!(map.power_db[r10].iter().all(|v| v.abs() < 0.5));
        for row in &map.power_db {
            let m: f64 = map.baseline_columns.iter().map(|&c| row[c]).sum::<f64>()
                / map.baseline_columns.len() as f64;
            assert!(m.abs() < 1e-9);
        }
    }

    #[test]
    fn single_trial_map_is_its_own_normalized_spectrogram() {
        let n = (11.9 * FS) as usize;
        let x = tone(12.0, |t| if t < 0.0 { 2.0 } else { 1.0 }, -1.9, n);
        let map = ersp_map(
            &set_of(vec![x.clone()], -1.9),
            &SpectrogramParams::default(),
            BASELINE_WINDOW_S,
        )
        .unwrap();
        let s = spectrogram(&x, FS, -1.9, &SpectrogramParams::default()).unwrap();
        let db = s.to_db();
        let base = s.frames_within(BASELINE_WINDOW_S);
        for i in 0..s.freqs_hz.len() {
            let b: f64 = base.iter().map(|&c| db[[i, c]]).sum::<f64>() / base.len() as f64;
            for j in 0..s.times_s.len() {
                assert!((map.power_db[i][j] - (db[[i, j]] - b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn missing_baseline_is_an_error() {
        let x = tone(10.0, |_| 1.0, 0.0, 7200);
        assert!(ersp_map(
            &set_of(vec![x.clone()], 0.0),
            &SpectrogramParams::default(),
            BASELINE_WINDOW_S
        )
        .is_err());
        assert!(erd_index(&set_of(vec![x], 0.0), &ErdParams::default()).is_err());
    }

    #[test]
    fn erd_identity_and_arithmetic() {
        let n = (11.9 * FS) as usize;
        let same = tone(10.0, |_| 1.0, -1.9, n);
        let idx = erd_index(&set_of(vec![same], -1.9), &ErdParams::default()).unwrap();
        assert!(idx.value_db.abs() < 1e-3);
        let tenth = tone(10.0, |t| if t < 0.0 { 1.0 } else { 0.1f64.sqrt() }, -1.9, n);
        let idx = erd_index(&set_of(vec![tenth], -1.9), &ErdParams::default()).unwrap();
        assert!((idx.value_db + 10.0).abs() < 1e-3, "{}", idx.value_db);
    }

    #[test]
    fn zero_baseline_is_an_error() {
        let n = (11.9 * FS) as usize;
        let x = vec![0.0; n];
        assert!(matches!(
            erd_index(&set_of(vec![x], -1.9), &ErdParams::default()),
            Err(Error::DegenerateBaseline)
        ));
    }

    #[test]
    fn compare_reports_empty_task() {
        let n = (11.9 * FS) as usize;
        let mut per = BTreeMap::new();
        per.insert(1, set_of(vec![tone(10.0, |_| 1.0, -1.9, n)], -1.9));
        per.insert(2, TrialSet::empty(FS, -1.9, vec!["Cz".into()]));
        let rows = compare_tasks(&per, &ErdParams::default());
        assert_eq!(rows.len(), 2);
        assert!(rows[0].index_db.is_some());
        assert!(rows[1].index_db.is_none() && rows[1].error.is_some());
    }

    #[test]
    fn csv_layout() {
        let n = (11.9 * FS) as usize;
        let map = ersp_map(
            &set_of(vec![tone(10.0, |_| 1.0, -1.9, n)], -1.9),
            &SpectrogramParams::default(),
            BASELINE_WINDOW_S,
        )
        .unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().count(),
            1 + map.freqs_hz.len() * map.times_s.len()
        );
        assert!(text.starts_with("freq_hz,time_s,db\n4,"));
    }
}
