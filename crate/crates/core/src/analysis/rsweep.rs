use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::MetricsLog;
use crate::model::{predict, train, Family, ModelConfig, TrainConfig};

/// Quality of an H-SIREN trained with one growth rate `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RSweepPoint {
    pub r: f64,
    pub final_loss: f64,
    pub mse: f64,
    pub psnr: f64,
    pub ssim: Option<f64>,
    pub diverged: Option<String>,
    #[serde(skip)]
    pub log: MetricsLog,
}

/// Trains `base` once per value of `r`, all else fixed, and scores the
/// selected parameters (best checkpoint or final) on `eval`, which defaults
/// to the training set.
pub fn r_sweep(
    base: &ModelConfig,
    train_cfg: &TrainConfig,
    data: &Dataset,
    eval: Option<&Dataset>,
    r_values: &[f64],
) -> Result<Vec<RSweepPoint>> {
    if base.family != Family::Hsiren {
        return Err(Error::InvalidArgument(format!(
            "r sweeps apply to hsiren, got {}",
            base.family
        )));
    }
    if let Some(r) = r_values.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
    }
    let eval = eval.unwrap_or(data);
    r_values
        .iter()
        .map(|&r| {
            let config = base.clone().with_r(r);
            let out = train(&config, train_cfg, data, Some(eval))?;
            let e = eval.evaluate(&predict(out.selected_params(), &config, eval.coords())?)?;
            Ok(RSweepPoint {
                r,
                final_loss: out.log.final_loss().unwrap_or(f64::NAN),
                mse: e.mse,
                psnr: e.psnr,
                ssim: e.ssim,
                diverged: out.diverged.map(|d| format!("iteration {}: {}", d.iteration, d.reason)),
                log: out.log,
            })
        })
        .collect()
}

/// Rows `r,mse,psnr,ssim`.
pub fn r_sweep_csv(points: &[RSweepPoint]) -> String {
    let mut out = String::from("r,mse,psnr,ssim\n");
    for p in points {
        let ssim = p.ssim.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{ssim}", p.r, p.mse, p.psnr);
    }
    out
}
