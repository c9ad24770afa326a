use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::build_grid;
use crate::error::{Error, Result};
use crate::model::{init_model, visit_hidden_outputs, Family, ModelConfig, Params};
use crate::numkit::{DftPlan, RealMatrix, SeededRng};

/// Inputs sampled on `[-1, 1]` for spectra at initialization.
pub const SPECTRUM_SAMPLES: usize = 10_000;

/// Mean DFT magnitude of every hidden neuron's output, per hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub family: Family,
    pub width: usize,
    pub depth: usize,
    pub samples: usize,
    /// `layers[l - 1]` holds bins `0..=samples/2` of hidden layer `l`.
    pub layers: Vec<Vec<f64>>,
}

impl SpectrumReport {
    pub fn layer(&self, layer: usize) -> Result<&[f64]> {
        if layer == 0 || layer > self.layers.len() {
            return Err(Error::InvalidArgument(format!(
                "layer {layer} outside 1..={}",
                self.layers.len()
            )));
        }
        Ok(&self.layers[layer - 1])
    }

    /// Rows `layer,bin,magnitude`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,bin,magnitude\n");
        for (l, bins) in self.layers.iter().enumerate() {
            for (k, m) in bins.iter().enumerate() {
                let _ = writeln!(out, "{},{k},{m}", l + 1);
            }
        }
        out
    }
}

const COLUMN_BLOCK: usize = 32;

/// Mean over columns of the DFT magnitude of each column of `outputs`
/// (`samples x neurons`).
pub fn mean_neuron_spectrum(outputs: &RealMatrix) -> Result<Vec<f64>> {
    let (n, neurons) = outputs.shape();
    let plan = DftPlan::new(n)?;
    if neurons == 0 {
        return Err(Error::InvalidArgument("layer has no neurons".into()));
    }
    let mut acc = vec![0.0; plan.bins()];
    let mut buf = Vec::with_capacity(n);
    let mut block = vec![0.0; n * COLUMN_BLOCK];
    let data = outputs.data();
    for start in (0..neurons).step_by(COLUMN_BLOCK) {
        let cols = COLUMN_BLOCK.min(neurons - start);
        for (t, row) in data.chunks_exact(neurons).enumerate() {
            for (c, &v) in row[start..start + cols].iter().enumerate() {
                block[c * n + t] = v;
            }
        }
        for c in 0..cols {
            plan.add_magnitude(block[c * n..(c + 1) * n].iter().copied(), &mut buf, &mut acc);
        }
    }
    let scale = 1.0 / neurons as f64;
    acc.iter_mut().for_each(|v| *v *= scale);
    Ok(acc)
}

fn check_config(config: &ModelConfig) -> Result<()> {
    config.validate()?;
    if config.input_dim != 1 {
        return Err(Error::InvalidArgument(format!(
            "spectra need a 1D input, got input_dim {}",
            config.input_dim
        )));
    }
    Ok(())
}

/// Spectra of given parameters over `samples` equidistant inputs.
pub fn spectrum_of(params: &Params, config: &ModelConfig, samples: usize) -> Result<SpectrumReport> {
    check_config(config)?;
    let coords = build_grid(&[samples])?.into_coords();
    let mut layers = Vec::with_capacity(config.hidden_depth);
    let mut failure = None;
    visit_hidden_outputs(params, config, &coords, |_, out| match mean_neuron_spectrum(out) {
        Ok(s) => layers.push(s),
        Err(e) => failure = Some(e),
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(SpectrumReport {
        family: config.family,
        width: config.hidden_width,
        depth: config.hidden_depth,
        samples,
        layers,
    })
}

/// Spectra at initialization over 10000 inputs on `[-1, 1]`.
pub fn activation_spectrum(config: &ModelConfig, seed: u64) -> Result<SpectrumReport> {
    check_config(config)?;
    let params = init_model(config, &mut SeededRng::new(seed))?;
    spectrum_of(&params, config, SPECTRUM_SAMPLES)
}

fn total(bins: &[f64]) -> Result<f64> {
    let sum: f64 = bins.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        Ok(sum)
    } else {
        Err(Error::Domain(format!("spectrum has total magnitude {sum}")))
    }
}

/// Magnitude-weighted mean bin of a layer.
pub fn spectral_centroid(report: &SpectrumReport, layer: usize) -> Result<f64> {
    let bins = report.layer(layer)?;
    let sum = total(bins)?;
    Ok(bins.iter().enumerate().map(|(k, m)| k as f64 * m).sum::<f64>() / sum)
}

/// Smallest bin whose cumulative magnitude reaches 99% of the total.
pub fn spectral_p99(report: &SpectrumReport, layer: usize) -> Result<f64> {
    let bins = report.layer(layer)?;
    let target = 0.99 * total(bins)?;
    let mut cum = 0.0;
    for (k, m) in bins.iter().enumerate() {
        cum += m;
        if cum >= target {
            return Ok(k as f64);
        }
    }
    Ok((bins.len() - 1) as f64)
}
