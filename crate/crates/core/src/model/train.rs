use std::time::Instant;

use super::{adam_step, backward, forward, init_model, mse_loss, predict, AdamState, ModelConfig, Params, TrainConfig};
use crate::data::{Dataset, Evaluation};
use crate::error::{Error, Result};
use crate::metrics::{EvalRecord, MetricsLog};
use crate::numkit::SeededRng;

/// Parameters with the lowest evaluation MSE seen during training.
#[derive(Debug, Clone, PartialEq)]
pub struct BestCheckpoint {
    pub iteration: usize,
    pub params: Params,
    pub evaluation: Evaluation,
}

/// Why training stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Diverged {
    pub iteration: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Final parameters, or after a divergence the last ones with a finite
    /// loss.
    pub params: Params,
    pub best: Option<BestCheckpoint>,
    pub log: MetricsLog,
    pub diverged: Option<Diverged>,
}

impl TrainOutcome {
    /// Best checkpoint when one was kept, the final parameters otherwise.
    pub fn selected_params(&self) -> &Params {
        self.best.as_ref().map_or(&self.params, |b| &b.params)
    }
}

fn record(log: &mut MetricsLog, iteration: usize, e: &Evaluation) {
    log.record_eval(EvalRecord {
        iteration,
        mse: e.mse,
        psnr: e.psnr,
        ssim: e.ssim,
    });
}

/// Full-batch Adam on the mean squared error, starting from parameters
/// drawn with `train_cfg.seed`.
///
/// The log holds `iterations + 1` losses: one before every update and one
/// for the final parameters. `eval` is scored every `eval_every` iterations
/// and at the end. A non-finite loss or gradient stops training and is
/// reported in [`TrainOutcome::diverged`].
pub fn train(
    config: &ModelConfig,
    train_cfg: &TrainConfig,
    data: &Dataset,
    eval: Option<&Dataset>,
) -> Result<TrainOutcome> {
    let params = init_model(config, &mut SeededRng::new(train_cfg.seed))?;
    train_from(params, config, train_cfg, data, eval)
}

/// As [`train`], from given initial parameters.
pub fn train_from(
    mut params: Params,
    config: &ModelConfig,
    train_cfg: &TrainConfig,
    data: &Dataset,
    eval: Option<&Dataset>,
) -> Result<TrainOutcome> {
    train_cfg.validate()?;
    params.check_matches(config)?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    for (name, ds) in std::iter::once(("training", data)).chain(eval.map(|e| ("evaluation", e))) {
        if ds.input_dim() != config.input_dim || ds.output_dim() != config.output_dim {
            return Err(Error::Shape(format!(
                "{name} set maps {} -> {}, model maps {} -> {}",
                ds.input_dim(),
                ds.output_dim(),
                config.input_dim,
                config.output_dim
            )));
        }
    }
    let eval_is_train = eval.is_some_and(|e| std::ptr::eq(e, data));
    let mut log = MetricsLog::default();
    let mut state = AdamState::new(&params);
    let mut best: Option<BestCheckpoint> = None;
    let mut diverged = None;
    let iterations = train_cfg.iterations;
    let mut before_update: Option<Params> = None;

    for it in 0..=iterations {
        let start = Instant::now();
        let (pred, cache) = forward(&params, config, data.coords())?;
        let (loss, grad) = mse_loss(&pred, data.targets())?;
        log.add_time("forward", start.elapsed().as_secs_f64());
        if !loss.is_finite() {
            if let Some(p) = before_update.take() {
                params = p;
            }
            diverged = Some(Diverged {
                iteration: it,
                reason: format!("training loss became {loss}"),
            });
            break;
        }
        log.record_loss(loss);

        if let Some(eval) = eval {
            if it % train_cfg.eval_every == 0 || it == iterations {
                let start = Instant::now();
                let e = if eval_is_train {
                    eval.evaluate(&pred)?
                } else {
                    eval.evaluate(&predict(&params, config, eval.coords())?)?
                };
                record(&mut log, it, &e);
                if train_cfg.best_checkpoint && best.as_ref().is_none_or(|b| e.mse < b.evaluation.mse) {
                    best = Some(BestCheckpoint {
                        iteration: it,
                        params: params.clone(),
                        evaluation: e,
                    });
                }
                log.add_time("eval", start.elapsed().as_secs_f64());
            }
        }
        if it == iterations {
            break;
        }

        let start = Instant::now();
        let grads = backward(&params, config, &cache, &grad)?;
        log.add_time("backward", start.elapsed().as_secs_f64());
        let start = Instant::now();
        before_update = Some(params.clone());
        let step = adam_step(&mut params, &grads, &mut state, train_cfg);
        log.add_time("optimizer", start.elapsed().as_secs_f64());
        match step {
            Err(Error::NonFinite(msg)) => {
                diverged = Some(Diverged { iteration: it, reason: msg });
                break;
            }
            Err(e) => return Err(e),
            Ok(()) if !params.is_finite() => {
                params = before_update.take().expect("saved before the update");
                diverged = Some(Diverged {
                    iteration: it,
                    reason: "update produced non-finite parameters".into(),
                });
                break;
            }
            Ok(()) => {}
        }
    }
    Ok(TrainOutcome {
        params,
        best,
        log,
        diverged,
    })
}
