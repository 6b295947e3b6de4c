//! `gaitbci` command-line front end.
//!
//! Every subcommand takes `--config <file.json>` whose keys are the long flag
//! names with underscores (`window_s`, `reject_uv`, ...). Flags given on the
//! command line win over the file. `synth` is the exception: its config file
//! is a full synthesis config and the flags patch it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use gaitbci::ersp::{compare_tasks, ersp_map, ErspMap, TaskErd};
use gaitbci::harness::container::config_hash;
use gaitbci::harness::study::{CombinationStudy, ErdStudy, WindowSweep};
use gaitbci::harness::*;
use gaitbci::montage::LAPLACIAN_CENTER;
use gaitbci::stimgen::*;
use gaitbci::synth::SynthConfig;

#[derive(Parser)]
#[command(
    name = "gaitbci",
    version,
    about = "Gait-stimulus SSMVEP and sensorimotor-rhythm analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a stimulus-set JSON, optionally with confound and schedule details.
    Stimgen(StimgenArgs),
    /// Generate a synthetic dataset container.
    Synth(SynthArgs),
    /// Classify one task of one dataset with a template bank.
    Classify(ClassifyArgs),
    /// Cb1 to Cb4 accuracy table across datasets.
    Combinations(CombinationsArgs),
    /// Accuracy against window length across datasets.
    Sweep(SweepArgs),
    /// Baseline-normalized time-frequency maps and ERD indices for one channel.
    Ersp(ErspArgs),
    /// ERD index per task with the accuracy-based group split.
    ErdStudy(ErdStudyArgs),
    /// Run every study on datasets and/or merge earlier study outputs.
    Report(ReportArgs),
}

#[derive(Debug, Serialize)]
struct CliError {
    kind: String,
    message: String,
}

impl CliError {
    fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.into(),
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", message)
    }
}

impl From<gaitbci::Error> for CliError {
    fn from(e: gaitbci::Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_json_value(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new("json", format!("{}: {e}", path.display())))
}

fn from_value<T: DeserializeOwned>(v: Value, what: &str) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::new("config", format!("{what}: {e}")))
}

/// Overlays the flags that were actually given on the config file's values.
/// Absent options, unset switches and empty lists count as not given.
fn resolve<T: Serialize + DeserializeOwned + Default>(
    flags: T,
    config: Option<&Path>,
) -> CliResult<T> {
    let Some(path) = config else {
        return Ok(flags);
    };
    let Value::Object(mut base) = read_json_value(path)? else {
        return Err(CliError::new(
            "config",
            format!("{}: expected a JSON object", path.display()),
        ));
    };
    let Value::Object(known) = serde_json::to_value(T::default()).expect("flags serialize") else {
        unreachable!("flag structs serialize as objects")
    };
    if let Some(k) = base.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::new(
            "config",
            format!("{}: unknown key `{k}`", path.display()),
        ));
    }
    let Value::Object(given) = serde_json::to_value(&flags).expect("flags serialize") else {
        unreachable!("flag structs serialize as objects")
    };
    for (k, v) in given {
        let unset = match &v {
            Value::Null | Value::Bool(false) => true,
            Value::Array(a) => a.is_empty(),
            _ => false,
        };
        if !unset {
            base.insert(k, v);
        }
    }
    from_value(Value::Object(base), &path.display().to_string())
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("output serializes") + "\n";
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| CliError::new("io", format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_name<T: DeserializeOwned>(name: &str, what: &str) -> CliResult<T> {
    serde_json::from_value(Value::String(name.to_ascii_lowercase()))
        .map_err(|_| CliError::new("invalid_parameter", format!("unknown {what} `{name}`")))
}

fn parse_band(text: &str) -> CliResult<(f64, f64)> {
    let bad = || {
        CliError::new(
            "invalid_parameter",
            format!("band `{text}` is not LO:HI in Hz"),
        )
    };
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_combination(name: &str) -> CliResult<CombinationId> {
    Ok(name.parse::<CombinationId>()?)
}

// ---------------------------------------------------------------- stimgen

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct StimgenArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// gait, flicker or checkerboard.
    #[arg(long)]
    kind: Option<String>,
    /// Monitor refresh rate in Hz.
    #[arg(long)]
    refresh_rate: Option<f64>,
    /// Frames each image is held, one per target (default 7,5,6,4).
    #[arg(long, value_delimiter = ',')]
    n_frames: Vec<u32>,
    /// Target positions, one per target (default left,right,up,down).
    #[arg(long, value_delimiter = ',')]
    positions: Vec<String>,
    /// Include stride-harmonic collisions for every template combination.
    #[arg(long)]
    confounds: bool,
    /// Highest stride harmonic searched for collisions.
    #[arg(long)]
    max_harmonic: Option<u32>,
    /// Include frame schedules of this duration in seconds.
    #[arg(long)]
    schedule_s: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn stimgen(flags: StimgenArgs) -> CliResult<()> {
    let config = flags.config.clone();
    let a = resolve(flags, config.as_deref())?;
    let kind: StimulusKind = parse_name(a.kind.as_deref().unwrap_or("gait"), "stimulus kind")?;
    let n_frames = if a.n_frames.is_empty() {
        vec![7, 5, 6, 4]
    } else {
        a.n_frames.clone()
    };
    let positions: Vec<Position> = if a.positions.is_empty() {
        [
            Position::Left,
            Position::Right,
            Position::Up,
            Position::Down,
        ]
        .into_iter()
        .cycle()
        .take(n_frames.len())
        .collect()
    } else {
        a.positions
            .iter()
            .map(|p| parse_name(p, "position"))
            .collect::<CliResult<_>>()?
    };
    if positions.len() != n_frames.len() {
        return Err(CliError::new(
            "invalid_parameter",
            format!(
                "{} positions for {} targets",
                positions.len(),
                n_frames.len()
            ),
        ));
    }
    let specs: Vec<StimulusSpec> = n_frames
        .iter()
        .zip(&positions)
        .map(|(&n, &p)| StimulusSpec {
            refresh_rate_hz: a.refresh_rate.unwrap_or(60.0),
            ..StimulusSpec::gait(n, p).with_kind(kind)
        })
        .collect();
    let records = stimulus_set_records(&specs)?;
    if !a.confounds && a.schedule_s.is_none() {
        return emit(&records, a.out.as_deref());
    }
    let mut doc = json!({ "stimuli": records });
    if a.confounds {
        let max = a.max_harmonic.unwrap_or(DEFAULT_MAX_HARMONIC);
        let ids: &[CombinationId] = if kind == StimulusKind::Gait {
            &CombinationId::GAIT
        } else {
            &[CombinationId::Harmonic2]
        };
        let mut table = serde_json::Map::new();
        for &id in ids {
            let comb = if id == CombinationId::Cb4 {
                Combination::reference_cb4()
            } else {
                Combination::standard(id)
            };
            let hits = detect_confounds(&specs, &comb, 1e-9, max)?;
            table.insert(
                id.to_string(),
                serde_json::to_value(hits).expect("serializes"),
            );
        }
        doc["confounds"] = Value::Object(table);
    }
    if let Some(d) = a.schedule_s {
        let schedules = specs
            .iter()
            .map(|s| build_schedule(s, d))
            .collect::<gaitbci::Result<Vec<_>>>()?;
        doc["schedules"] = serde_json::to_value(schedules).expect("serializes");
    }
    emit(&doc, a.out.as_deref())
}

// ---------------------------------------------------------------- synth

#[derive(Args)]
struct SynthArgs {
    /// Synthesis config JSON; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials_per_class: Option<usize>,
    /// Task ids to generate, e.g. 1,2,3,4.
    #[arg(long, value_delimiter = ',')]
    tasks: Vec<u8>,
    /// Channel labels to record.
    #[arg(long, value_delimiter = ',')]
    channels: Vec<String>,
    /// Occipital evoked-response SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Sensorimotor rhythm SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    smr_snr_db: Option<f64>,
    /// Stride-harmonic leak amplitude applied to every class.
    #[arg(long)]
    harmonic_leak_uv: Option<f64>,
    /// Drop all background noise.
    #[arg(long)]
    no_noise: bool,
}

fn synth(a: SynthArgs) -> CliResult<()> {
    let mut cfg: SynthConfig = match &a.config {
        Some(p) => from_value(read_json_value(p)?, &p.display().to_string())?,
        None => SynthConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.trials_per_class {
        cfg.trials_per_class = n;
    }
    if !a.tasks.is_empty() {
        cfg.tasks = a.tasks.clone();
    }
    if !a.channels.is_empty() {
        cfg.channels = a.channels.clone();
    }
    if let Some(v) = a.snr_db {
        cfg.occipital.snr_db = Some(v);
    }
    if let Some(v) = a.smr_snr_db {
        cfg.sensorimotor.snr_db = Some(v);
    }
    if let Some(v) = a.harmonic_leak_uv {
        cfg.occipital.harmonic_leak_uv = vec![v; cfg.stimulus_set.len()];
    }
    if a.no_noise {
        cfg = cfg.without_noise();
    }
    let ds = synthesize(&cfg)?;
    write_dataset(&a.out, &ds)?;
    emit(
        &json!({
            "dataset": a.out,
            "seed": cfg.seed,
            "config_hash": config_hash(&cfg),
            "fs_hz": ds.recording.fs_hz,
            "channels": ds.recording.channel_names,
            "n_samples": ds.recording.n_samples(),
            "n_events": ds.recording.events.len(),
        }),
        None,
    )
}

// ---------------------------------------------------------------- studies

/// Options shared by every dataset-consuming subcommand.
#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct DataArgs {
    /// Dataset directory; repeat for several subjects.
    #[arg(long)]
    dataset: Vec<PathBuf>,
    /// Peak-to-peak artifact threshold in uV.
    #[arg(long)]
    reject_uv: Option<f64>,
    /// Keep every trial.
    #[arg(long)]
    no_reject: bool,
    /// Full study configuration (config file only).
    #[arg(skip)]
    study: Option<StudyConfig>,
}

impl DataArgs {
    fn study_config(&self) -> StudyConfig {
        let mut cfg = self.study.clone().unwrap_or_default();
        if let Some(th) = self.reject_uv {
            cfg.pipeline.reject_threshold_uv = Some(th);
        }
        if self.no_reject {
            cfg.pipeline.reject_threshold_uv = None;
        }
        cfg
    }

    fn load(&self) -> CliResult<Vec<Dataset>> {
        if self.dataset.is_empty() {
            return Err(CliError::usage("at least one --dataset is required"));
        }
        self.dataset.iter().map(|p| Ok(read_dataset(p)?)).collect()
    }

    fn load_one(&self) -> CliResult<Dataset> {
        if self.dataset.len() > 1 {
            return Err(CliError::usage("exactly one --dataset is expected"));
        }
        Ok(self.load()?.remove(0))
    }
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct ClassifyArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// cb1, cb2, cb3, cb4 or harmonic2 (default: per stimulus type).
    #[arg(long)]
    combination: Option<String>,
    #[arg(long)]
    window_s: Option<f64>,
    /// Task id 1 to 4 (default 3).
    #[arg(long)]
    task: Option<u8>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn classify(flags: ClassifyArgs) -> CliResult<()> {
    let config = flags.config.clone();
    let a = resolve(flags, config.as_deref())?;
    let cfg = a.data.study_config();
    let ds = a.data.load_one()?;
    let comb = a
        .combination
        .as_deref()
        .map(parse_combination)
        .transpose()?;
    let result = classify_task(
        &ds,
        a.task.unwrap_or(cfg.gait_task),
        comb,
        a.window_s.unwrap_or(cfg.window_s),
        &cfg,
    )?;
    emit(&result, a.out.as_deref())
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct CombinationsArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    #[arg(long)]
    window_s: Option<f64>,
    /// Gait task id (default 3).
    #[arg(long)]
    task: Option<u8>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn combinations(flags: CombinationsArgs) -> CliResult<()> {
    let config = flags.config.clone();
    let a = resolve(flags, config.as_deref())?;
    let mut cfg = a.data.study_config();
    cfg.window_s = a.window_s.unwrap_or(cfg.window_s);
    cfg.gait_task = a.task.unwrap_or(cfg.gait_task);
    let study: CombinationStudy = run_combination_study(&a.data.load()?, &cfg)?;
    emit(&study, a.out.as_deref())
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct SweepArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Bank for every task (default: per stimulus type).
    #[arg(long)]
    combination: Option<String>,
    /// Window lengths in seconds (default 1,2,3,4,5,6).
    #[arg(long, value_delimiter = ',')]
    windows: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sweep(flags: SweepArgs) -> CliResult<()> {
    let config = flags.config.clone();
    let a = resolve(flags, config.as_deref())?;
    let mut cfg = a.data.study_config();
    if !a.windows.is_empty() {
        cfg.sweep_windows_s = a.windows.clone();
    }
    let comb = a
        .combination
        .as_deref()
        .map(parse_combination)
        .transpose()?;
    let table: WindowSweep = run_window_sweep(&a.data.load()?, comb, &cfg)?;
    emit(&table, a.out.as_deref())
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct ErspArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Channel label (default Cz).
    #[arg(long)]
    channel: Option<String>,
    /// Use the raw channel even for Cz instead of its Laplacian.
    #[arg(long)]
    no_laplacian: bool,
    /// ERD band as LO:HI in Hz (default 8:26).
    #[arg(long)]
    band: Option<String>,
    /// Restrict to one task id.
    #[arg(long)]
    task: Option<u8>,
    /// Also write the maps as a flat task_id,freq_hz,time_s,db table.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct TaskMap {
    task_id: u8,
    map: ErspMap,
}

#[derive(Serialize)]
struct ErspOutput {
    dataset: String,
    channel: String,
    laplacian: bool,
    band_hz: (f64, f64),
    erd: Vec<TaskErd>,
    maps: Vec<TaskMap>,
}

fn ersp(flags: ErspArgs) -> CliResult<()> {
    let config = flags.config.clone();
    let a = resolve(flags, config.as_deref())?;
    let mut cfg = a.data.study_config().pipeline;
    if let Some(b) = &a.band {
        cfg.erd.band_hz = parse_band(b)?;
    }
    let ds = a.data.load_one()?;
    let channel = a
        .channel
        .clone()
        .unwrap_or_else(|| LAPLACIAN_CENTER.to_string());
    let lap = !a.no_laplacian && channel.eq_ignore_ascii_case(LAPLACIAN_CENTER);
    let prepared = channel_trials(&ds.recording, &channel, lap, a.task, &cfg)?;
    let mut per_task = BTreeMap::new();
    for t in prepared.trials.task_ids() {
        per_task.insert(t, prepared.trials.with_task(t));
    }
    if per_task.is_empty() {
        return Err(CliError::new("empty_input", "no usable trials"));
    }
    let maps = per_task
        .iter()
        .map(|(&task_id, set)| {
            Ok(TaskMap {
                task_id,
                map: ersp_map(set, &cfg.erd.spectrogram, cfg.erd.baseline_window_s)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(path) = &a.csv {
        let mut text = String::from("task_id,freq_hz,time_s,db\n");
        for m in &maps {
            for (f, row) in m.map.freqs_hz.iter().zip(&m.map.power_db) {
                for (t, v) in m.map.times_s.iter().zip(row) {
                    writeln!(text, "{},{f},{t},{v}", m.task_id).expect("string write");
                }
            }
        }
        fs::write(path, text)
            .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    }
    let out = ErspOutput {
        dataset: ds.name(),
        channel,
        laplacian: lap,
        band_hz: cfg.erd.band_hz,
        erd: compare_tasks(&per_task, &cfg.erd),
        maps,
    };
    emit(&out, a.out.as_deref())
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct ErdStudyArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Accuracy at or above which a subject joins Group 1.
    #[arg(long)]
    threshold: Option<f64>,
    /// Classification window for the group split.
    #[arg(long)]
    window_s: Option<f64>,
    /// ERD band as LO:HI in Hz (default 8:26).
    #[arg(long)]
    band: Option<String>,
    /// Also write a subject,group,accuracy,task_id,... table.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn erd_study(flags: ErdStudyArgs) -> CliResult<()> {
    let config = flags.config.clone();
    let a = resolve(flags, config.as_deref())?;
    let mut cfg = a.data.study_config();
    cfg.group_threshold = a.threshold.unwrap_or(cfg.group_threshold);
    cfg.window_s = a.window_s.unwrap_or(cfg.window_s);
    if let Some(b) = &a.band {
        cfg.pipeline.erd.band_hz = parse_band(b)?;
    }
    let study: ErdStudy = run_erd_study(&a.data.load()?, &cfg)?;
    if let Some(path) = &a.csv {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut text = String::from(
            "subject,group,accuracy,task_id,n_trials,index_db,mean_trial_db,sd_trial_db\n",
        );
        for s in &study.subjects {
            for t in &s.tasks {
                writeln!(
                    text,
                    "{},{},{},{},{},{},{},{}",
                    s.subject,
                    s.group,
                    s.accuracy,
                    t.task_id,
                    t.n_trials,
                    opt(t.index_db),
                    opt(t.mean_trial_db),
                    opt(t.sd_trial_db)
                )
                .expect("string write");
            }
        }
        fs::write(path, text)
            .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    }
    emit(&study, a.out.as_deref())
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct ReportArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Earlier report or study output to merge; repeatable.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Record the wall-clock generation time.
    #[arg(long)]
    timestamp: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn as_report(v: Value, base: &StudyConfig, path: &Path) -> CliResult<ExperimentReport> {
    if let Ok(r) = serde_json::from_value::<ExperimentReport>(v.clone()) {
        return Ok(r);
    }
    let mut r = ExperimentReport::empty(base.clone());
    if let Ok(s) = serde_json::from_value::<CombinationStudy>(v.clone()) {
        r.combination_study = Some(s);
    } else if let Ok(s) = serde_json::from_value::<WindowSweep>(v.clone()) {
        r.window_sweep = Some(s);
    } else if let Ok(s) = serde_json::from_value::<ErdStudy>(v) {
        r.erd_study = Some(s);
    } else {
        return Err(CliError::new(
            "json",
            format!(
                "{}: not a report, combination study, window sweep or ERD study",
                path.display()
            ),
        ));
    }
    Ok(r)
}

fn report(flags: ReportArgs) -> CliResult<()> {
    let config = flags.config.clone();
    let a = resolve(flags, config.as_deref())?;
    let cfg = a.data.study_config();
    if a.data.dataset.is_empty() && a.input.is_empty() {
        return Err(CliError::usage("give at least one --dataset or --input"));
    }
    let mut report = if a.data.dataset.is_empty() {
        ExperimentReport::empty(cfg.clone())
    } else {
        ExperimentReport::run(&a.data.load()?, cfg.clone())?
    };
    for path in &a.input {
        report = report.merge(as_report(read_json_value(path)?, &cfg, path)?);
    }
    if a.timestamp {
        report = report.stamped_now();
    }
    emit(&report, a.out.as_deref())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Stimgen(a) => stimgen(a),
        Command::Synth(a) => synth(a),
        Command::Classify(a) => classify(a),
        Command::Combinations(a) => combinations(a),
        Command::Sweep(a) => sweep(a),
        Command::Ersp(a) => ersp(a),
        Command::ErdStudy(a) => erd_study(a),
        Command::Report(a) => report(a),
    }
}

fn fail(e: CliError, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": e }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::usage(e.to_string().trim_end()), 2),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e, 1),
    }
}
