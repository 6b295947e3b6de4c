//! Dataset container, preprocessing wiring, multi-subject studies and reports.

pub mod container;
pub mod pipeline;
pub mod report;
pub mod study;

pub use container::{read_dataset, synthesize, write_dataset, Dataset, Manifest, Provenance};
pub use pipeline::{
    channel_trials, occipital_trials, sensorimotor_trials, PipelineConfig, PreparedTrials,
};
pub use report::{sign_test, ExperimentReport, SignTest};
pub use study::{
    assign_group, classify_task, run_combination_study, run_erd_study, run_window_sweep,
    CombinationStudy, ErdStudy, StudyConfig, WindowSweep,
};
