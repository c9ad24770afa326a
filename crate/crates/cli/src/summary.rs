use std::path::Path;

use serde::{Deserialize, Serialize};

use inr_core::data::Evaluation;
use inr_core::metrics::EvalRecord;
use inr_core::model::Family;

use crate::config::{ExperimentConfig, Task};
use crate::error::CliError;

pub const STD_CONVENTION: &str = "population (divide by n)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub psnr: f64,
    pub ssim: Option<f64>,
}

impl From<&Evaluation> for Metrics {
    fn from(e: &Evaluation) -> Self {
        Self {
            mse: e.mse,
            psnr: e.psnr,
            ssim: e.ssim,
        }
    }
}

impl From<&EvalRecord> for Metrics {
    fn from(e: &EvalRecord) -> Self {
        Self {
            mse: e.mse,
            psnr: e.psnr,
            ssim: e.ssim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpointed {
    pub iteration: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpectrum {
    pub layer: usize,
    pub centroid: Option<f64>,
    pub p99: Option<f64>,
}

/// One trained (or, for spectra, initialized) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub id: String,
    pub group: String,
    pub family: Family,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_loss: Option<f64>,
    /// Metrics of the parameters at the end of training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_metrics: Option<Metrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best: Option<Checkpointed>,
    /// The best checkpoint when one is kept, the final metrics otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported: Option<Metrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<LayerSpectrum>>,
    pub diverged: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and population standard deviation; `None` for no values.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self { mean, std: var.sqrt() })
    }
}

/// Reported metrics of one group (family, or r value) over seeds and inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub group: String,
    pub runs: usize,
    pub psnr: Stat,
    pub ssim: Option<Stat>,
    pub mse: Stat,
}

/// Groups in first-seen order with statistics over their reported metrics.
pub fn aggregate(runs: &[RunSummary]) -> Vec<Aggregate> {
    let mut groups: Vec<&str> = Vec::new();
    for r in runs {
        if r.reported.is_some() && !groups.contains(&r.group.as_str()) {
            groups.push(&r.group);
        }
    }
    groups
        .into_iter()
        .filter_map(|g| {
            let metrics: Vec<Metrics> = runs
                .iter()
                .filter(|r| r.group == g)
                .filter_map(|r| r.reported)
                .collect();
            let take = |f: fn(&Metrics) -> f64| Stat::of(&metrics.iter().map(f).collect::<Vec<_>>());
            let ssim: Option<Vec<f64>> = metrics.iter().map(|m| m.ssim).collect();
            Some(Aggregate {
                group: g.to_string(),
                runs: metrics.len(),
                psnr: take(|m| m.psnr)?,
                ssim: ssim.and_then(|s| Stat::of(&s)),
                mse: take(|m| m.mse)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub task: Task,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub std_convention: String,
    pub runs: Vec<RunSummary>,
    pub aggregates: Vec<Aggregate>,
    /// Files written next to `summary.json`, relative to it.
    pub artifacts: Vec<String>,
    pub wall_time_seconds: f64,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config {
            file: path.to_path_buf(),
            line: e.line().max(1),
            message: format!("not a run summary: {e}"),
        })
    }

    pub fn any_diverged(&self) -> bool {
        self.runs.iter().any(|r| r.diverged.is_some())
    }
}
