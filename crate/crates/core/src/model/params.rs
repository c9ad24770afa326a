use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::numkit::{uniform_fill, ComplexMatrix, RealMatrix, SeededRng};

/// Weights `(fan_out x fan_in)` and bias `(fan_out)` of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LayerParams {
    Real {
        weight: RealMatrix,
        bias: Vec<f64>,
    },
    /// Bias stored as interleaved `(re, im)` pairs.
    Complex {
        weight: ComplexMatrix,
        bias: Vec<f64>,
    },
}

impl LayerParams {
    pub fn fan_out(&self) -> usize {
        match self {
            LayerParams::Real { weight, .. } => weight.rows(),
            LayerParams::Complex { weight, .. } => weight.rows(),
        }
    }

    pub fn fan_in(&self) -> usize {
        match self {
            LayerParams::Real { weight, .. } => weight.cols(),
            LayerParams::Complex { weight, .. } => weight.cols(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, LayerParams::Complex { .. })
    }

    /// Weight then bias storage as flat slices.
    pub fn slices(&self) -> [&[f64]; 2] {
        match self {
            LayerParams::Real { weight, bias } => [weight.data(), bias],
            LayerParams::Complex { weight, bias } => [weight.data(), bias],
        }
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 2] {
        match self {
            LayerParams::Real { weight, bias } => [weight.data_mut(), bias],
            LayerParams::Complex { weight, bias } => [weight.data_mut(), bias],
        }
    }

    fn zeros_like(&self) -> Self {
        match self {
            LayerParams::Real { weight, bias } => LayerParams::Real {
                weight: RealMatrix::zeros(weight.rows(), weight.cols()),
                bias: vec![0.0; bias.len()],
            },
            LayerParams::Complex { weight, bias } => LayerParams::Complex {
                weight: ComplexMatrix::zeros(weight.rows(), weight.cols()),
                bias: vec![0.0; bias.len()],
            },
        }
    }
}

static GENERATION: AtomicU64 = AtomicU64::new(1);

fn next_generation() -> u64 {
    GENERATION.fetch_add(1, Ordering::Relaxed)
}

/// All layer parameters of a network, output layer last.
///
/// Every mutable access stamps a fresh generation, which forward caches
/// record so that `backward` can reject caches from older weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    layers: Vec<LayerParams>,
    #[serde(skip, default = "next_generation")]
    generation: u64,
}

impl PartialEq for Params {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

impl Params {
    pub fn from_layers(layers: Vec<LayerParams>) -> Result<Self> {
        for pair in layers.windows(2) {
            if pair[1].fan_in() != pair[0].fan_out() {
                return Err(Error::Shape(format!(
                    "layer fan_in {} does not match previous fan_out {}",
                    pair[1].fan_in(),
                    pair[0].fan_out()
                )));
            }
        }
        Ok(Self {
            layers,
            generation: next_generation(),
        })
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        self.generation = next_generation();
        &mut self.layers
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(LayerParams::zeros_like).collect(),
            generation: next_generation(),
        }
    }

    pub fn num_scalars(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.slices())
            .map(<[f64]>::len)
            .sum()
    }

    /// Every scalar in storage order.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.slices())
            .flat_map(|s| s.iter().copied())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .flat_map(|l| l.slices())
            .all(|s| s.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn congruent(&self, other: &Params) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.is_complex() == b.is_complex()
                    && a.slices().iter().zip(b.slices()).all(|(x, y)| x.len() == y.len())
            })
    }

    /// Checks layer count and shapes against a config.
    pub fn check_matches(&self, config: &ModelConfig) -> Result<()> {
        let shapes = config.layer_shapes();
        if shapes.len() != self.layers.len() {
            return Err(Error::Shape(format!(
                "config has {} layers, params have {}",
                shapes.len(),
                self.layers.len()
            )));
        }
        for (i, ((out, inp), layer)) in shapes.iter().zip(&self.layers).enumerate() {
            let complex_expected = config.is_complex() && i >= 1 && i < config.hidden_depth;
            if layer.fan_out() != *out || layer.fan_in() != *inp || layer.is_complex() != complex_expected {
                return Err(Error::Shape(format!(
                    "layer {}: expected {}{out}x{inp}, found {}{}x{}",
                    i + 1,
                    if complex_expected { "complex " } else { "" },
                    if layer.is_complex() { "complex " } else { "" },
                    layer.fan_out(),
                    layer.fan_in()
                )));
            }
        }
        Ok(())
    }
}

/// Draws fresh parameters. Layers are filled in order, weights before bias;
/// complex layers draw the real parts then the imaginary parts.
pub fn init_model(config: &ModelConfig, rng: &mut SeededRng) -> Result<Params> {
    config.validate()?;
    let mut layers = Vec::with_capacity(config.hidden_depth + 1);
    for (i, &(fan_out, fan_in)) in config.layer_shapes().iter().enumerate() {
        let l = i + 1;
        let b = config.layer_bounds(l)?;
        let complex = config.is_complex() && l >= 2 && l <= config.hidden_depth;
        let weight = uniform_fill(rng, fan_out, fan_in, b.weight_lo, b.weight_hi)?;
        let bias = uniform_fill(rng, 1, fan_out, b.bias_lo, b.bias_hi)?;
        layers.push(if complex {
            let weight_im = uniform_fill(rng, fan_out, fan_in, b.weight_lo, b.weight_hi)?;
            let bias_im = uniform_fill(rng, 1, fan_out, b.bias_lo, b.bias_hi)?;
            LayerParams::Complex {
                weight: ComplexMatrix::from_parts(&weight, &weight_im)?,
                bias: ComplexMatrix::from_parts(&bias, &bias_im)?.data().to_vec(),
            }
        } else {
            LayerParams::Real {
                weight,
                bias: bias.into_data(),
            }
        });
    }
    Params::from_layers(layers)
}
