//! Multi-subject studies. Each dataset is one synthetic (or recorded)
//! subject; subjects are processed in parallel and reduced in input order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::container::Dataset;
use super::pipeline::{occipital_trials, sensorimotor_trials, PipelineConfig};
use crate::cca::{evaluate, ClassificationResult, ConfusionMatrix, TemplateBank};
use crate::error::{Error, Result};
use crate::ersp::{compare_tasks, mean_sd, TaskErd};
use crate::sigproc::{seconds_to_samples, task_stimulus_kind, TrialSet};
use crate::stimgen::{Combination, CombinationId, Component, StimulusKind};

/// Accuracy at or above which a subject joins Group 1.
pub const DEFAULT_GROUP_THRESHOLD: f64 = 0.85;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub pipeline: PipelineConfig,
    /// Task whose trials feed the combination study and the group split.
    pub gait_task: u8,
    pub window_s: f64,
    pub sweep_windows_s: Vec<f64>,
    pub group_threshold: f64,
    /// Replaces the reference Cb4 rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cb4_rows: Option<Vec<Vec<Component>>>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            pipeline: PipelineConfig::default(),
            gait_task: 3,
            window_s: 6.0,
            sweep_windows_s: (1..=6).map(f64::from).collect(),
            group_threshold: DEFAULT_GROUP_THRESHOLD,
            cb4_rows: None,
        }
    }
}

impl StudyConfig {
    pub fn combination(&self, id: CombinationId) -> Combination {
        match (id, &self.cb4_rows) {
            (CombinationId::Cb4, Some(rows)) => Combination::cb4(rows.clone()),
            _ => Combination::standard(id),
        }
    }
}

/// Mean and sample standard deviation across subjects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let (mean, sd) = mean_sd(values);
        Summary { mean, sd }
    }
}

fn task_trials(ds: &Dataset, task_id: u8, cfg: &StudyConfig) -> Result<TrialSet> {
    if !ds.recording.events.iter().any(|e| e.task_id == task_id) {
        return Err(Error::MissingTask(task_id));
    }
    let prepared = occipital_trials(&ds.recording, Some(task_id), &cfg.pipeline)?;
    if prepared.trials.is_empty() {
        return Err(Error::Empty(format!(
            "no usable trials for task {task_id} in {}",
            ds.name()
        )));
    }
    Ok(prepared.trials)
}

fn bank_for(
    ds: &Dataset,
    trials: &TrialSet,
    comb: &Combination,
    window_s: f64,
) -> Result<TemplateBank> {
    let n = seconds_to_samples(window_s, trials.fs_hz).max(1) as usize;
    TemplateBank::new(ds.stimulus_set()?, comb, trials.fs_hz, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationRow {
    pub combination: CombinationId,
    /// One accuracy per subject, in dataset order.
    pub accuracies: Vec<f64>,
    pub summary: Summary,
    /// Summed over subjects.
    pub confusion: ConfusionMatrix,
    /// One matrix per subject, in dataset order.
    pub subject_confusions: Vec<ConfusionMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationStudy {
    pub task_id: u8,
    pub window_s: f64,
    pub subjects: Vec<String>,
    pub rows: Vec<CombinationRow>,
}

impl CombinationStudy {
    pub fn row(&self, id: CombinationId) -> Option<&CombinationRow> {
        self.rows.iter().find(|r| r.combination == id)
    }
}

/// Cb1 to Cb4 at the configured window on the gait task of every dataset.
pub fn run_combination_study(datasets: &[Dataset], cfg: &StudyConfig) -> Result<CombinationStudy> {
    if datasets.is_empty() {
        return Err(Error::Empty("no datasets".into()));
    }
    let per_subject = datasets
        .par_iter()
        .map(|ds| {
            let trials = task_trials(ds, cfg.gait_task, cfg)?;
            CombinationId::GAIT
                .iter()
                .map(|&id| {
                    let bank = bank_for(ds, &trials, &cfg.combination(id), cfg.window_s)?;
                    evaluate(&trials, &bank, cfg.window_s)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = CombinationId::GAIT
        .iter()
        .enumerate()
        .map(|(k, &id)| {
            let accuracies: Vec<f64> = per_subject.iter().map(|r| r[k].accuracy).collect();
            let subject_confusions: Vec<ConfusionMatrix> =
                per_subject.iter().map(|r| r[k].confusion.clone()).collect();
            let confusion =
                ConfusionMatrix::sum(subject_confusions.iter()).expect("at least one subject");
            CombinationRow {
                combination: id,
                summary: Summary::of(&accuracies),
                accuracies,
                confusion,
                subject_confusions,
            }
        })
        .collect();
    Ok(CombinationStudy {
        task_id: cfg.gait_task,
        window_s: cfg.window_s,
        subjects: datasets.iter().map(Dataset::name).collect(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub window_s: f64,
    pub accuracies: Vec<f64>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub task_id: u8,
    pub stimulus_kind: StimulusKind,
    pub combination: CombinationId,
    pub rows: Vec<WindowRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSweep {
    pub subjects: Vec<String>,
    pub tables: Vec<SweepTable>,
}

/// Default bank for a stimulus type: Cb4 for gait, F and 2F otherwise.
pub fn default_combination(kind: StimulusKind) -> CombinationId {
    match kind {
        StimulusKind::Gait => CombinationId::Cb4,
        _ => CombinationId::Harmonic2,
    }
}

/// Classifies one task of one dataset. The bank defaults to the stimulus
/// type's usual combination; the stimulus set is re-typed to the task's
/// stimulus kind.
pub fn classify_task(
    ds: &Dataset,
    task_id: u8,
    combination: Option<CombinationId>,
    window_s: f64,
    cfg: &StudyConfig,
) -> Result<ClassificationResult> {
    let kind = task_stimulus_kind(task_id)
        .ok_or_else(|| Error::param("task_id", format!("{task_id} is not in 1..=4")))?;
    let trials = task_trials(ds, task_id, cfg)?;
    let stimuli: Vec<_> = ds
        .stimulus_set()?
        .iter()
        .map(|s| s.with_kind(kind))
        .collect();
    let comb = cfg.combination(combination.unwrap_or_else(|| default_combination(kind)));
    let n = seconds_to_samples(window_s, trials.fs_hz).max(1) as usize;
    let bank = TemplateBank::new(&stimuli, &comb, trials.fs_hz, n)?;
    evaluate(&trials, &bank, window_s)
}

/// Accuracy against window length for every task present in all datasets.
/// `combination` overrides the per-type default bank.
pub fn run_window_sweep(
    datasets: &[Dataset],
    combination: Option<CombinationId>,
    cfg: &StudyConfig,
) -> Result<WindowSweep> {
    if datasets.is_empty() {
        return Err(Error::Empty("no datasets".into()));
    }
    if cfg.sweep_windows_s.is_empty() {
        return Err(Error::param(
            "sweep_windows_s",
            "at least one window required",
        ));
    }
    if let Some(&w) = cfg
        .sweep_windows_s
        .iter()
        .find(|&&w| w > cfg.pipeline.epoch_s + 1e-9)
    {
        return Err(Error::param(
            "sweep_windows_s",
            format!("window {w} s exceeds {} s epochs", cfg.pipeline.epoch_s),
        ));
    }
    let mut tasks: Vec<u8> = (1..=4)
        .filter(|t| {
            datasets
                .iter()
                .all(|d| d.recording.events.iter().any(|e| e.task_id == *t))
        })
        .collect();
    tasks.sort_unstable();
    if tasks.is_empty() {
        return Err(Error::Empty("no task shared by every dataset".into()));
    }
    let plan: Vec<(u8, StimulusKind, CombinationId)> = tasks
        .iter()
        .map(|&t| {
            let kind = task_stimulus_kind(t).expect("task in 1..=4");
            (
                t,
                kind,
                combination.unwrap_or_else(|| default_combination(kind)),
            )
        })
        .collect();
    let per_subject = datasets
        .par_iter()
        .map(|ds| {
            plan.iter()
                .map(|&(task, kind, id)| {
                    let trials = task_trials(ds, task, cfg)?;
                    let stimuli: Vec<_> = ds
                        .stimulus_set()?
                        .iter()
                        .map(|s| s.with_kind(kind))
                        .collect();
                    let comb = cfg.combination(id);
                    cfg.sweep_windows_s
                        .iter()
                        .map(|&w| {
                            let n = seconds_to_samples(w, trials.fs_hz).max(1) as usize;
                            let bank = TemplateBank::new(&stimuli, &comb, trials.fs_hz, n)?;
                            Ok(evaluate(&trials, &bank, w)?.accuracy)
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let tables = plan
        .iter()
        .enumerate()
        .map(|(k, &(task_id, stimulus_kind, combination))| SweepTable {
            task_id,
            stimulus_kind,
            combination,
            rows: cfg
                .sweep_windows_s
                .iter()
                .enumerate()
                .map(|(j, &window_s)| {
                    let accuracies: Vec<f64> = per_subject.iter().map(|s| s[k][j]).collect();
                    WindowRow {
                        window_s,
                        summary: Summary::of(&accuracies),
                        accuracies,
                    }
                })
                .collect(),
        })
        .collect();
    Ok(WindowSweep {
        subjects: datasets.iter().map(Dataset::name).collect(),
        tables,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectErd {
    pub subject: String,
    pub accuracy: f64,
    pub group: u8,
    pub tasks: Vec<TaskErd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTask {
    pub task_id: u8,
    pub n_subjects: usize,
    pub index_db: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: u8,
    pub subjects: Vec<String>,
    pub tasks: Vec<GroupTask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErdStudy {
    pub threshold: f64,
    pub window_s: f64,
    pub subjects: Vec<SubjectErd>,
    pub groups: Vec<GroupSummary>,
}

/// Group 1 when `accuracy >= threshold`, else Group 2.
pub fn assign_group(accuracy: f64, threshold: f64) -> u8 {
    if accuracy >= threshold {
        1
    } else {
        2
    }
}

fn summarize_groups(subjects: &[SubjectErd]) -> Vec<GroupSummary> {
    [1u8, 2]
        .iter()
        .map(|&group| {
            let members: Vec<&SubjectErd> = subjects.iter().filter(|s| s.group == group).collect();
            let mut by_task: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
            for s in &members {
                for t in &s.tasks {
                    if let Some(v) = t.index_db {
                        by_task.entry(t.task_id).or_default().push(v);
                    }
                }
            }
            GroupSummary {
                group,
                subjects: members.iter().map(|s| s.subject.clone()).collect(),
                tasks: by_task
                    .into_iter()
                    .map(|(task_id, v)| GroupTask {
                        task_id,
                        n_subjects: v.len(),
                        index_db: Summary::of(&v),
                    })
                    .collect(),
            }
        })
        .collect()
}

/// Per subject: Cb4 accuracy on the gait task, Cz-Laplacian ERD index for
/// tasks 1 to 4, and the group split at the configured threshold.
pub fn run_erd_study(datasets: &[Dataset], cfg: &StudyConfig) -> Result<ErdStudy> {
    if datasets.is_empty() {
        return Err(Error::Empty("no datasets".into()));
    }
    let subjects = datasets
        .par_iter()
        .map(|ds| {
            for t in 1..=4 {
                if !ds.recording.events.iter().any(|e| e.task_id == t) {
                    return Err(Error::MissingTask(t));
                }
            }
            let trials = task_trials(ds, cfg.gait_task, cfg)?;
            let bank = bank_for(
                ds,
                &trials,
                &cfg.combination(CombinationId::Cb4),
                cfg.window_s,
            )?;
            let accuracy = evaluate(&trials, &bank, cfg.window_s)?.accuracy;
            let smr = sensorimotor_trials(&ds.recording, None, &cfg.pipeline)?;
            let per_task: BTreeMap<u8, TrialSet> =
                (1..=4).map(|t| (t, smr.trials.with_task(t))).collect();
            Ok(SubjectErd {
                subject: ds.name(),
                accuracy,
                group: assign_group(accuracy, cfg.group_threshold),
                tasks: compare_tasks(&per_task, &cfg.pipeline.erd),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErdStudy {
        threshold: cfg.group_threshold,
        window_s: cfg.window_s,
        groups: summarize_groups(&subjects),
        subjects,
    })
}

impl ErdStudy {
    /// Same subjects re-split at another threshold.
    pub fn regroup(&self, threshold: f64) -> ErdStudy {
        let subjects: Vec<SubjectErd> = self
            .subjects
            .iter()
            .map(|s| SubjectErd {
                group: assign_group(s.accuracy, threshold),
                ..s.clone()
            })
            .collect();
        ErdStudy {
            threshold,
            window_s: self.window_s,
            groups: summarize_groups(&subjects),
            subjects,
        }
    }
}
