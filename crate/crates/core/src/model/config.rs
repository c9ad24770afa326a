use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::activations::{ActivationSpec, InitBounds, DEFAULT_OMEGA0, DEFAULT_R};
use crate::error::{Error, Result};

/// Network family: which activation every hidden layer uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Siren,
    Finer,
    Hsiren,
    Wire,
    Relu,
    ReluPe,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Siren,
        Family::Finer,
        Family::Hsiren,
        Family::Wire,
        Family::Relu,
        Family::ReluPe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Siren => "siren",
            Family::Finer => "finer",
            Family::Hsiren => "hsiren",
            Family::Wire => "wire",
            Family::Relu => "relu",
            Family::ReluPe => "relu_pe",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family {s:?}")))
    }
}

/// Architecture of a coordinate MLP: `hidden_depth` activated layers of
/// width `hidden_width` followed by a linear output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_width: usize,
    pub hidden_depth: usize,
    pub omega0: f64,
    pub r: f64,
    /// FINER bias half-range; `None` means `√(1/fan_in)` per layer.
    pub k: Option<f64>,
    pub s0: f64,
    pub pe_bands: usize,
}

impl ModelConfig {
    /// Family defaults: ω₀ = 30 (20 for WIRE), r = 2, s₀ = 10, FINER
    /// bias `√(1/n)`, 10 encoding bands for `relu_pe`.
    pub fn new(
        family: Family,
        input_dim: usize,
        output_dim: usize,
        hidden_width: usize,
        hidden_depth: usize,
    ) -> Self {
        Self {
            family,
            input_dim,
            output_dim,
            hidden_width,
            hidden_depth,
            omega0: if family == Family::Wire { 20.0 } else { DEFAULT_OMEGA0 },
            r: DEFAULT_R,
            k: None,
            s0: 10.0,
            pe_bands: if family == Family::ReluPe { 10 } else { 0 },
        }
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_k(mut self, k: Option<f64>) -> Self {
        self.k = k;
        self
    }

    pub fn with_s0(mut self, s0: f64) -> Self {
        self.s0 = s0;
        self
    }

    pub fn with_pe_bands(mut self, bands: usize) -> Self {
        self.pe_bands = bands;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.input_dim == 0 || self.output_dim == 0 {
            return bad("input_dim and output_dim must be at least 1".into());
        }
        if self.hidden_width == 0 || self.hidden_depth == 0 {
            return bad(format!(
                "hidden_width and hidden_depth must be at least 1, got {}x{}",
                self.hidden_width, self.hidden_depth
            ));
        }
        if self.pe_bands > 0 && self.family != Family::ReluPe {
            return bad(format!("pe_bands is only used by relu_pe, not {}", self.family));
        }
        if let Some(k) = self.k {
            if !(k > 0.0 && k.is_finite()) {
                return bad(format!("k must be positive, got {k}"));
            }
        }
        for layer in 1..=self.hidden_depth {
            self.hidden_activation(layer)?.validate()?;
        }
        Ok(())
    }

    /// Width of the vector the first layer sees (after positional encoding).
    pub fn encoded_input_dim(&self) -> usize {
        self.input_dim * (1 + 2 * self.pe_bands)
    }

    pub fn fan_in(&self, layer: usize) -> usize {
        if layer == 1 {
            self.encoded_input_dim()
        } else {
            self.hidden_width
        }
    }

    /// True when hidden layers from 2 on carry complex values.
    pub fn is_complex(&self) -> bool {
        self.family == Family::Wire
    }

    fn finer_k(&self, fan_in: usize) -> f64 {
        self.k.unwrap_or_else(|| (1.0 / fan_in as f64).sqrt())
    }

    /// Activation of hidden layer `layer` (1-based).
    pub fn hidden_activation(&self, layer: usize) -> Result<ActivationSpec> {
        if layer == 0 || layer > self.hidden_depth {
            return Err(Error::InvalidArgument(format!(
                "layer {layer} outside 1..={}",
                self.hidden_depth
            )));
        }
        let w = self.omega0;
        Ok(match self.family {
            Family::Siren => ActivationSpec::sine(w),
            Family::Finer => ActivationSpec::finer(w, self.finer_k(self.fan_in(layer))),
            Family::Hsiren if layer == 1 => ActivationSpec::hsiren_first(w, self.r),
            Family::Hsiren => ActivationSpec::sine(w),
            Family::Wire => ActivationSpec::wire(w, self.s0),
            Family::Relu | Family::ReluPe => ActivationSpec::relu(),
        })
    }

    /// Initialization ranges for layer `layer`; `hidden_depth + 1` is the
    /// linear output layer.
    ///
    /// The output layer takes the family's deep-layer weight range and the
    /// `√(1/n)` bias range.
    pub fn layer_bounds(&self, layer: usize) -> Result<InitBounds> {
        if layer <= self.hidden_depth {
            return self.hidden_activation(layer)?.init_bounds(layer, self.fan_in(layer));
        }
        if layer != self.hidden_depth + 1 {
            return Err(Error::InvalidArgument(format!("no layer {layer}")));
        }
        let reference = match self.family {
            Family::Siren | Family::Hsiren | Family::Finer => ActivationSpec::sine(self.omega0),
            Family::Wire => ActivationSpec::wire(self.omega0, self.s0),
            Family::Relu | Family::ReluPe => ActivationSpec::relu(),
        };
        reference.init_bounds(layer, self.hidden_width)
    }

    /// `(fan_out, fan_in)` for every layer, output layer last.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.hidden_depth + 1);
        for l in 1..=self.hidden_depth {
            shapes.push((self.hidden_width, self.fan_in(l)));
        }
        shapes.push((self.output_dim, self.hidden_width));
        shapes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::ActivationKind;

    #[test]
    fn hsiren_changes_only_the_first_layer() {
        let c = ModelConfig::new(Family::Hsiren, 1, 1, 64, 5);
        assert_eq!(c.hidden_activation(1).unwrap().kind, ActivationKind::HSirenFirst);
        for l in 2..=5 {
            assert_eq!(c.hidden_activation(l).unwrap().kind, ActivationKind::Sine);
        }
    }

    #[test]
    fn shape_chain() {
        let c = ModelConfig::new(Family::Hsiren, 1, 1, 64, 5);
        assert_eq!(
            c.layer_shapes(),
            vec![(64, 1), (64, 64), (64, 64), (64, 64), (64, 64), (1, 64)]
        );
        let pe = ModelConfig::new(Family::ReluPe, 2, 3, 16, 2).with_pe_bands(4);
        assert_eq!(pe.layer_shapes()[0], (16, 18));
    }

    #[test]
    fn finer_default_k_tracks_fan_in() {
        let c = ModelConfig::new(Family::Finer, 2, 3, 256, 2);
        assert!((c.layer_bounds(1).unwrap().bias_hi - (0.5f64).sqrt()).abs() < 1e-15);
        assert!((c.layer_bounds(2).unwrap().bias_hi - 1.0 / 16.0).abs() < 1e-15);
        let fixed = c.with_k(Some(0.3));
        assert_eq!(fixed.layer_bounds(2).unwrap().bias_hi, 0.3);
    }

    #[test]
    fn output_layer_uses_deep_weight_range() {
        let c = ModelConfig::new(Family::Siren, 2, 3, 512, 2);
        let b = c.layer_bounds(3).unwrap();
        assert!((b.weight_hi - (6.0f64 / 512.0).sqrt() / 30.0).abs() < 1e-15);
        assert!(c.layer_bounds(4).is_err());
    }

    #[test]
    fn validation() {
        assert!(ModelConfig::new(Family::Siren, 1, 1, 0, 3).validate().is_err());
        assert!(ModelConfig::new(Family::Siren, 1, 1, 4, 0).validate().is_err());
        assert!(ModelConfig::new(Family::Siren, 1, 1, 4, 1).with_pe_bands(2).validate().is_err());
        assert!(ModelConfig::new(Family::Hsiren, 1, 1, 4, 1).with_r(0.0).validate().is_err());
        assert!(ModelConfig::new(Family::Wire, 2, 3, 4, 2).validate().is_ok());
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
            assert_eq!(serde_json::to_string(&f).unwrap(), format!("\"{}\"", f.name()));
        }
        assert!("sirenx".parse::<Family>().is_err());
    }
}
