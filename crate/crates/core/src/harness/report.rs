use serde::{Deserialize, Serialize};

use super::container::Dataset;
use super::study::{
    run_combination_study, run_erd_study, run_window_sweep, CombinationStudy, ErdStudy,
    StudyConfig, WindowSweep,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub n_events: usize,
}

impl DatasetRef {
    pub fn of(ds: &Dataset) -> Self {
        DatasetRef {
            name: ds.name(),
            seed: ds.provenance.seed,
            config_hash: ds.provenance.config_hash.clone(),
            n_events: ds.recording.events.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Wall-clock creation time. The only field that varies between reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_unix_s: Option<u64>,
    pub datasets: Vec<DatasetRef>,
    pub config: StudyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combination_study: Option<CombinationStudy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_sweep: Option<WindowSweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erd_study: Option<ErdStudy>,
}

impl ExperimentReport {
    pub fn empty(config: StudyConfig) -> Self {
        ExperimentReport {
            generated_unix_s: None,
            datasets: Vec::new(),
            config,
            combination_study: None,
            window_sweep: None,
            erd_study: None,
        }
    }

    /// Runs every study the datasets support: the combination study and
    /// window sweep always, the ERD study when all four tasks are present.
    pub fn run(datasets: &[Dataset], config: StudyConfig) -> Result<Self> {
        let has_all_tasks = datasets
            .iter()
            .all(|d| (1..=4).all(|t| d.recording.events.iter().any(|e| e.task_id == t)));
        Ok(ExperimentReport {
            generated_unix_s: None,
            datasets: datasets.iter().map(DatasetRef::of).collect(),
            combination_study: Some(run_combination_study(datasets, &config)?),
            window_sweep: Some(run_window_sweep(datasets, None, &config)?),
            erd_study: if has_all_tasks {
                Some(run_erd_study(datasets, &config)?)
            } else {
                None
            },
            config,
        })
    }

    pub fn stamped_now(mut self) -> Self {
        self.generated_unix_s = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self
    }

    pub fn without_timestamp(&self) -> Self {
        ExperimentReport {
            generated_unix_s: None,
            ..self.clone()
        }
    }

    /// Fills empty sections from `other`; sections already present win.
    pub fn merge(mut self, other: ExperimentReport) -> Self {
        for d in other.datasets {
            if !self.datasets.contains(&d) {
                self.datasets.push(d);
            }
        }
        self.combination_study = self.combination_study.or(other.combination_study);
        self.window_sweep = self.window_sweep.or(other.window_sweep);
        self.erd_study = self.erd_study.or(other.erd_study);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One-sided sign test that paired differences are positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub positive: usize,
    pub negative: usize,
    pub ties: usize,
    /// `P(X >= positive)` for `X ~ Binomial(positive + negative, 1/2)`.
    pub p_value: f64,
}

pub fn sign_test(differences: &[f64]) -> SignTest {
    let positive = differences.iter().filter(|&&d| d > 0.0).count();
    let negative = differences.iter().filter(|&&d| d < 0.0).count();
    let ties = differences.len() - positive - negative;
    let n = positive + negative;
    // exact binomial tail via running binomial coefficients
    let mut p = 0.0;
    let mut coef = 1.0f64;
    for k in 0..=n {
        if k >= positive {
            p += coef;
        }
        coef = coef * (n - k) as f64 / (k + 1) as f64;
    }
    SignTest {
        positive,
        negative,
        ties,
        p_value: p / 2f64.powi(n as i32),
    }
}
