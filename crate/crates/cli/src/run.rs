use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use inr_core::analysis::{activation_spectrum, fit1d_csv, fit_1d_with, r_sweep, spectral_centroid, spectral_p99, Fit1dConfig};
use inr_core::data::{frames_to_dataset, image_to_dataset, load_frames, load_image, Dataset};
use inr_core::metrics::MetricsLog;
use inr_core::model::{predict, train, Family, ModelConfig, TrainConfig, TrainOutcome};

use crate::config::{input_stem, ExperimentConfig, Task};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::summary::{aggregate, Checkpointed, LayerSpectrum, Metrics, RunSummary, Summary, STD_CONVENTION};

pub const SUMMARY_FILE: &str = "summary.json";
pub const METRICS_FILE: &str = "metrics.csv";

/// Command-line overrides of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub summary: Summary,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Loads `config_path`, applies the overrides and runs the experiment.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut config = ExperimentConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new(""));
    if let Some(seed) = opts.seed {
        config.seeds = vec![seed];
    }
    let out_dir = match &opts.out {
        Some(dir) => {
            config.io.output_dir = dir.clone();
            dir.clone()
        }
        None => resolve(base, &config.io.output_dir),
    };
    run_config(&config, base, &out_dir)
}

struct Collector {
    runs: Vec<RunSummary>,
    metrics: String,
}

impl Collector {
    fn new(header: &str) -> Self {
        Self {
            runs: Vec::new(),
            metrics: format!("{header}\n"),
        }
    }

    fn add_log(&mut self, id: &str, log: &MetricsLog) {
        for row in log.csv_rows() {
            let _ = writeln!(self.metrics, "{id},{row}");
        }
    }

    fn push(&mut self, run: RunSummary) {
        match &run.reported {
            Some(m) => eprintln!("{}: psnr {:.3} mse {:.4e}", run.id, m.psnr, m.mse),
            None => eprintln!("{}: done", run.id),
        }
        if let Some(d) = &run.diverged {
            eprintln!("{}: diverged at {d}", run.id);
        }
        self.runs.push(run);
    }
}

const TRAIN_HEADER: &str = "run,iteration,loss,psnr,ssim";

/// Runs an already parsed config; inputs resolve against `base_dir`.
pub fn run_config(config: &ExperimentConfig, base_dir: &Path, out_dir: &Path) -> Result<RunReport, CliError> {
    config
        .validate()
        .map_err(|v| CliError::Usage(format!("invalid config: {}: {}", v.path, v.message)))?;
    let inputs: Vec<PathBuf> = config.io.inputs.iter().map(|p| resolve(base_dir, p)).collect();
    let mut out = OutputDir::acquire(out_dir)?;
    let previous = out.path().join(SUMMARY_FILE);
    if previous.is_file() {
        if let Ok(old) = Summary::load(&previous) {
            out.remove_previous(&old.artifacts)?;
        }
    }
    let start = Instant::now();
    let collector = match config.task {
        Task::FitImage | Task::Superres => fit_images(config, &inputs, &mut out)?,
        Task::FitVideo => fit_videos(config, &inputs, &mut out)?,
        Task::Fit1d => fit_1d(config, &mut out)?,
        Task::Spectrum => spectra(config, &mut out)?,
        Task::RSweep => sweep(config, &inputs, &mut out)?,
    };
    out.write(METRICS_FILE, collector.metrics.as_bytes())?;
    let summary = Summary {
        name: config.name.clone(),
        task: config.task,
        config: config.clone(),
        seeds: config.seeds.clone(),
        std_convention: STD_CONVENTION.to_string(),
        aggregates: aggregate(&collector.runs),
        runs: collector.runs,
        artifacts: out.artifacts().to_vec(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    out.write_unlisted(SUMMARY_FILE, summary.to_json().as_bytes())?;
    Ok(RunReport {
        output_dir: out.path().to_path_buf(),
        summary,
    })
}

fn train_cfg(config: &ExperimentConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        seed,
        ..config.train.clone()
    }
}

fn checkpointed(out: &TrainOutcome) -> Option<Checkpointed> {
    out.best.as_ref().map(|b| Checkpointed {
        iteration: b.iteration,
        metrics: (&b.evaluation).into(),
    })
}

fn diverged(out: &TrainOutcome) -> Option<String> {
    out.diverged
        .as_ref()
        .map(|d| format!("iteration {}: {}", d.iteration, d.reason))
}

struct Trained {
    outcome: TrainOutcome,
    model: ModelConfig,
}

/// Trains one family and seed on `data`, scoring `eval`.
fn train_one(
    config: &ExperimentConfig,
    coll: &mut Collector,
    stem: &str,
    family: Family,
    seed: u64,
    data: &Dataset,
    eval: &Dataset,
) -> Result<Trained, CliError> {
    let model = config.model.build(family, data.input_dim(), data.output_dim());
    let outcome = train(&model, &train_cfg(config, seed), data, Some(eval))?;
    let id = format!("{stem}/{family}/seed{seed}");
    coll.add_log(&id, &outcome.log);
    let final_metrics = outcome.log.last_eval().map(Metrics::from);
    let best = checkpointed(&outcome);
    coll.push(RunSummary {
        id,
        group: family.to_string(),
        family,
        seed,
        input: Some(stem.to_string()),
        r: None,
        final_loss: outcome.log.final_loss(),
        final_metrics,
        reported: best.as_ref().map(|b| b.metrics).or(final_metrics),
        best,
        spectrum: None,
        diverged: diverged(&outcome),
    });
    Ok(Trained { outcome, model })
}

fn fit_images(config: &ExperimentConfig, inputs: &[PathBuf], out: &mut OutputDir) -> Result<Collector, CliError> {
    let images = inputs
        .iter()
        .map(|p| Ok((input_stem(p), load_image(p)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut coll = Collector::new(TRAIN_HEADER);
    for (stem, img) in &images {
        let full = image_to_dataset(img)?;
        let low = match config.task {
            Task::Superres => Some(full.subsample_stride2()?),
            _ => None,
        };
        let data = low.as_ref().unwrap_or(&full);
        for &family in &config.families {
            for &seed in &config.seeds {
                let t = train_one(config, &mut coll, stem, family, seed, data, &full)?;
                let pred = predict(t.outcome.selected_params(), &t.model, full.coords())?;
                let recon = full.reconstruct(&pred)?;
                out.write_png(&format!("{stem}_{family}_seed{seed}.png"), &recon[0])?;
            }
        }
    }
    Ok(coll)
}

fn fit_videos(config: &ExperimentConfig, inputs: &[PathBuf], out: &mut OutputDir) -> Result<Collector, CliError> {
    let videos = inputs
        .iter()
        .map(|p| Ok((input_stem(p), load_frames(p)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut coll = Collector::new(TRAIN_HEADER);
    for (stem, frames) in &videos {
        let data = frames_to_dataset(frames)?;
        for &family in &config.families {
            for &seed in &config.seeds {
                let t = train_one(config, &mut coll, stem, family, seed, &data, &data)?;
                let pred = predict(t.outcome.selected_params(), &t.model, data.coords())?;
                out.write_frames(&format!("{stem}_{family}_seed{seed}"), &data.reconstruct(&pred)?)?;
            }
        }
    }
    Ok(coll)
}

fn fit_1d(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Collector, CliError> {
    let points = config.points.clone().unwrap_or_default();
    let setup = Fit1dConfig {
        hidden_width: config.model.hidden_width,
        hidden_depth: config.model.hidden_depth,
        train_points: points.train,
        eval_points: points.eval,
        finer_k: config.model.k,
        train: config.train.clone(),
    };
    let mut coll = Collector::new(TRAIN_HEADER);
    let mut results = Vec::new();
    for &seed in &config.seeds {
        for r in fit_1d_with(&config.families, seed, &setup)? {
            let id = format!("{}/seed{seed}", r.family);
            coll.add_log(&id, &r.log);
            let final_metrics = r.log.last_eval().map(Metrics::from);
            let best = config
                .train
                .best_checkpoint
                .then(|| r.log.best_eval())
                .flatten()
                .map(|e| Checkpointed {
                    iteration: e.iteration,
                    metrics: e.into(),
                });
            coll.push(RunSummary {
                id,
                group: r.family.to_string(),
                family: r.family,
                seed,
                input: None,
                r: None,
                final_loss: Some(r.train_mse),
                final_metrics,
                reported: best.as_ref().map(|b| b.metrics).or(final_metrics),
                best,
                spectrum: None,
                diverged: r.diverged.clone(),
            });
            results.push(r);
        }
    }
    out.write("fit1d.csv", fit1d_csv(&results)?.as_bytes())?;
    Ok(coll)
}

fn spectra(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Collector, CliError> {
    let mut coll = Collector::new("run,layer,centroid,p99");
    let mut csv = String::from("family,seed,layer,bin,magnitude\n");
    for &family in &config.families {
        for &seed in &config.seeds {
            let model = config.model.build(family, 1, 1);
            let report = activation_spectrum(&model, seed)?;
            for line in report.to_csv().lines().skip(1) {
                let _ = writeln!(csv, "{family},{seed},{line}");
            }
            let id = format!("{family}/seed{seed}");
            let layers: Vec<LayerSpectrum> = (1..=report.layers.len())
                .map(|l| LayerSpectrum {
                    layer: l,
                    centroid: spectral_centroid(&report, l).ok(),
                    p99: spectral_p99(&report, l).ok(),
                })
                .collect();
            for l in &layers {
                let show = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(coll.metrics, "{id},{},{},{}", l.layer, show(l.centroid), show(l.p99));
            }
            coll.push(RunSummary {
                id,
                group: family.to_string(),
                family,
                seed,
                input: None,
                r: None,
                final_loss: None,
                final_metrics: None,
                best: None,
                reported: None,
                spectrum: Some(layers),
                diverged: None,
            });
        }
    }
    out.write("spectrum.csv", csv.as_bytes())?;
    Ok(coll)
}

fn sweep(config: &ExperimentConfig, inputs: &[PathBuf], out: &mut OutputDir) -> Result<Collector, CliError> {
    let images = inputs
        .iter()
        .map(|p| Ok((input_stem(p), load_image(p)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut coll = Collector::new(TRAIN_HEADER);
    let mut csv = String::from("input,seed,r,mse,psnr,ssim\n");
    for (stem, img) in &images {
        let data = image_to_dataset(img)?;
        let base = config.model.build(Family::Hsiren, data.input_dim(), data.output_dim());
        for &seed in &config.seeds {
            for p in r_sweep(&base, &train_cfg(config, seed), &data, None, &config.r_values)? {
                let id = format!("{stem}/r{}/seed{seed}", p.r);
                coll.add_log(&id, &p.log);
                let ssim = p.ssim.map(|s| s.to_string()).unwrap_or_default();
                let _ = writeln!(csv, "{stem},{seed},{},{},{},{ssim}", p.r, p.mse, p.psnr);
                let best = config
                    .train
                    .best_checkpoint
                    .then(|| p.log.best_eval())
                    .flatten()
                    .map(|e| Checkpointed {
                        iteration: e.iteration,
                        metrics: e.into(),
                    });
                coll.push(RunSummary {
                    id,
                    group: format!("r={}", p.r),
                    family: Family::Hsiren,
                    seed,
                    input: Some(stem.clone()),
                    r: Some(p.r),
                    final_loss: Some(p.final_loss),
                    final_metrics: p.log.last_eval().map(Metrics::from),
                    best,
                    reported: Some(Metrics {
                        mse: p.mse,
                        psnr: p.psnr,
                        ssim: p.ssim,
                    }),
                    spectrum: None,
                    diverged: p.diverged.clone(),
                });
            }
        }
    }
    out.write("r_sweep.csv", csv.as_bytes())?;
    Ok(coll)
}
