use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{build_grid, Dataset};
use crate::error::{Error, Result};
use crate::metrics::MetricsLog;
use crate::model::{predict, train, Family, ModelConfig, TrainConfig};
use crate::numkit::RealMatrix;

/// `sin(30x) / (10x)`, continued by its limit 3 at the origin.
pub fn fit1d_target(x: f64) -> f64 {
    if x == 0.0 {
        3.0
    } else {
        (30.0 * x).sin() / (10.0 * x)
    }
}

/// Setup of the 1D overfitting experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fit1dConfig {
    pub hidden_width: usize,
    pub hidden_depth: usize,
    pub train_points: usize,
    pub eval_points: usize,
    /// FINER bias half-range; `None` means `√(1/fan_in)`.
    pub finer_k: Option<f64>,
    pub train: TrainConfig,
}

impl Default for Fit1dConfig {
    fn default() -> Self {
        Self {
            hidden_width: 64,
            hidden_depth: 5,
            train_points: 200,
            eval_points: 2000,
            finer_k: None,
            train: TrainConfig {
                learning_rate: 1e-4,
                iterations: 1000,
                eval_every: 50,
                ..TrainConfig::default()
            },
        }
    }
}

impl Fit1dConfig {
    pub fn model(&self, family: Family) -> ModelConfig {
        let config = ModelConfig::new(family, 1, 1, self.hidden_width, self.hidden_depth);
        if family == Family::Finer {
            config.with_k(self.finer_k)
        } else {
            config
        }
    }
}

/// One family trained on the 1D target.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit1dResult {
    pub family: Family,
    pub seed: u64,
    pub train_coords: Vec<f64>,
    pub train_targets: Vec<f64>,
    pub eval_coords: Vec<f64>,
    pub eval_targets: Vec<f64>,
    pub predictions: Vec<f64>,
    pub train_mse: f64,
    pub eval_mse: f64,
    pub log: MetricsLog,
    pub diverged: Option<String>,
}

/// Equidistant samples of the target on `[-1, 1]`.
pub fn fit1d_dataset(points: usize) -> Result<Dataset> {
    if points < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 points, got {points}")));
    }
    let coords = build_grid(&[points])?.into_coords();
    let targets = coords.map(fit1d_target);
    Dataset::from_samples(coords, targets)
}

pub fn fit_1d_experiment(families: &[Family], seed: u64) -> Result<Vec<Fit1dResult>> {
    fit_1d_with(families, seed, &Fit1dConfig::default())
}

/// Trains every family from `seed` and scores it on the evaluation grid.
/// Divergence is recorded in the result rather than returned as an error.
pub fn fit_1d_with(families: &[Family], seed: u64, setup: &Fit1dConfig) -> Result<Vec<Fit1dResult>> {
    let train_set = fit1d_dataset(setup.train_points)?;
    let eval_set = fit1d_dataset(setup.eval_points)?;
    let train_cfg = TrainConfig { seed, ..setup.train.clone() };
    families
        .iter()
        .map(|&family| {
            let config = setup.model(family);
            let out = train(&config, &train_cfg, &train_set, Some(&eval_set))?;
            let pred: RealMatrix = predict(&out.params, &config, eval_set.coords())?;
            let eval_mse = eval_set.evaluate(&pred)?.mse;
            let train_mse = out.log.final_loss().unwrap_or(f64::NAN);
            Ok(Fit1dResult {
                family,
                seed,
                train_coords: train_set.coords().data().to_vec(),
                train_targets: train_set.targets().data().to_vec(),
                eval_coords: eval_set.coords().data().to_vec(),
                eval_targets: eval_set.targets().data().to_vec(),
                predictions: pred.into_data(),
                train_mse,
                eval_mse,
                diverged: out.diverged.map(|d| format!("iteration {}: {}", d.iteration, d.reason)),
                log: out.log,
            })
        })
        .collect()
}

/// Columns `seed,x,target` then one prediction column per family, one block
/// of evaluation rows per seed. Results of one seed must share the grid.
pub fn fit1d_csv(results: &[Fit1dResult]) -> Result<String> {
    let mut seeds: Vec<u64> = results.iter().map(|r| r.seed).collect();
    seeds.dedup();
    let families: Vec<Family> = {
        let mut f: Vec<Family> = Vec::new();
        for r in results {
            if !f.contains(&r.family) {
                f.push(r.family);
            }
        }
        f
    };
    let mut out = String::from("seed,x,target");
    for f in &families {
        let _ = write!(out, ",{f}");
    }
    out.push('\n');
    for seed in seeds {
        let block: Vec<&Fit1dResult> = families
            .iter()
            .map(|f| {
                results
                    .iter()
                    .find(|r| r.seed == seed && r.family == *f)
                    .ok_or_else(|| Error::InvalidArgument(format!("seed {seed} has no {f} result")))
            })
            .collect::<Result<_>>()?;
        let first = block[0];
        for (i, (x, t)) in first.eval_coords.iter().zip(&first.eval_targets).enumerate() {
            let _ = write!(out, "{seed},{x},{t}");
            for r in &block {
                let _ = write!(out, ",{}", r.predictions[i]);
            }
            out.push('\n');
        }
    }
    Ok(out)
}
