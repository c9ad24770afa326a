//! Layer nonlinearities, their exact derivatives and the per-layer uniform
//! initialization bounds.
//!
//! | kind           | `apply(x)`                          |
//! |----------------|-------------------------------------|
//! | `Sine`         | `sin(ω₀ x)`                         |
//! | `Finer`        | `sin(ω₀ x (1 + |x|))`               |
//! | `HSirenFirst`  | `sin(ω₀ sinh(r x))`                 |
//! | `WireGabor`    | `e^{iω₀z} e^{-|s₀z|²}` (complex)    |
//! | `Relu`         | `max(0, x)`                         |
//! | `Identity`     | `x`                                 |

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_OMEGA0: f64 = 30.0;
pub const DEFAULT_R: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActivationKind {
    Sine,
    Finer,
    HSirenFirst,
    WireGabor,
    Relu,
    Identity,
}

/// A nonlinearity together with its parameters. Parameters a kind does not
/// use are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub omega0: f64,
    pub r: f64,
    pub k: f64,
    pub s0: f64,
}

/// Symmetric uniform ranges for one layer's weights and biases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitBounds {
    pub weight_lo: f64,
    pub weight_hi: f64,
    pub bias_lo: f64,
    pub bias_hi: f64,
}

impl InitBounds {
    fn symmetric(weight: f64, bias: f64) -> Self {
        Self {
            weight_lo: -weight,
            weight_hi: weight,
            bias_lo: -bias,
            bias_hi: bias,
        }
    }
}

/// `(sinh y, cosh y)` from one exponential; odd in `y` bit for bit.
#[inline]
fn sinh_cosh(y: f64) -> (f64, f64) {
    let a = y.abs();
    if a > 700.0 || a.is_nan() {
        return (y.sinh(), y.cosh());
    }
    let m = a.exp_m1();
    let e = m + 1.0;
    let sh = m * (m + 2.0) / (2.0 * e);
    (sh.copysign(y), sh + 1.0 / e)
}

impl ActivationSpec {
    fn with_kind(kind: ActivationKind) -> Self {
        Self {
            kind,
            omega0: DEFAULT_OMEGA0,
            r: DEFAULT_R,
            k: 1.0,
            s0: 10.0,
        }
    }

    pub fn sine(omega0: f64) -> Self {
        Self {
            omega0,
            ..Self::with_kind(ActivationKind::Sine)
        }
    }

    pub fn finer(omega0: f64, k: f64) -> Self {
        Self {
            omega0,
            k,
            ..Self::with_kind(ActivationKind::Finer)
        }
    }

    pub fn hsiren_first(omega0: f64, r: f64) -> Self {
        Self {
            omega0,
            r,
            ..Self::with_kind(ActivationKind::HSirenFirst)
        }
    }

    pub fn wire(omega0: f64, s0: f64) -> Self {
        Self {
            omega0,
            s0,
            ..Self::with_kind(ActivationKind::WireGabor)
        }
    }

    pub fn relu() -> Self {
        Self::with_kind(ActivationKind::Relu)
    }

    pub fn identity() -> Self {
        Self::with_kind(ActivationKind::Identity)
    }

    pub fn validate(&self) -> Result<()> {
        use ActivationKind::*;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite for {:?}, got {v}",
                    self.kind
                )))
            }
        };
        match self.kind {
            Sine => positive("omega0", self.omega0),
            Finer => positive("omega0", self.omega0).and(positive("k", self.k)),
            HSirenFirst => positive("omega0", self.omega0).and(positive("r", self.r)),
            WireGabor => positive("omega0", self.omega0).and(positive("s0", self.s0)),
            Relu | Identity => Ok(()),
        }
    }

    /// Evaluates the activation. For `WireGabor` this is the real part of
    /// [`apply_complex`](Self::apply_complex) at a real argument.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        use ActivationKind::*;
        let w = self.omega0;
        match self.kind {
            Sine => (w * x).sin(),
            Finer => (w * x * (1.0 + x.abs())).sin(),
            HSirenFirst => (w * sinh_cosh(self.r * x).0).sin(),
            WireGabor => (w * x).cos() * (-(self.s0 * x).powi(2)).exp(),
            Relu => x.max(0.0),
            Identity => x,
        }
    }

    /// Exact derivative of [`apply`](Self::apply). The ReLU derivative at 0
    /// is taken as 0.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        self.apply_with_derivative(x).1
    }

    /// Value and derivative together, sharing the trigonometric evaluation.
    #[inline]
    pub fn apply_with_derivative(&self, x: f64) -> (f64, f64) {
        use ActivationKind::*;
        let w = self.omega0;
        match self.kind {
            Sine => {
                let (s, c) = (w * x).sin_cos();
                (s, w * c)
            }
            Finer => {
                let a = x.abs();
                let (s, c) = (w * x * (1.0 + a)).sin_cos();
                (s, w * (1.0 + 2.0 * a) * c)
            }
            HSirenFirst => {
                let (sh, ch) = sinh_cosh(self.r * x);
                let (s, c) = (w * sh).sin_cos();
                (s, w * self.r * ch * c)
            }
            WireGabor => {
                let g = (-(self.s0 * x).powi(2)).exp();
                let (s, c) = (w * x).sin_cos();
                (c * g, -g * (w * s + 2.0 * self.s0 * self.s0 * x * c))
            }
            Relu => {
                if x > 0.0 {
                    (x, 1.0)
                } else {
                    (x.max(0.0), 0.0)
                }
            }
            Identity => (x, 1.0),
        }
    }

    /// Complex Gabor wavelet `ψ(z) = exp(iω₀z) · exp(-|s₀z|²)`.
    pub fn apply_complex(&self, z: Complex64) -> Result<Complex64> {
        if self.kind != ActivationKind::WireGabor {
            return Err(Error::InvalidArgument(format!(
                "apply_complex needs WireGabor, got {:?}",
                self.kind
            )));
        }
        let carrier = (Complex64::i() * self.omega0 * z).exp();
        let envelope = (-(self.s0 * self.s0) * z.norm_sqr()).exp();
        Ok(carrier * envelope)
    }

    /// Uniform initialization ranges for hidden layer `layer` (1-based) with
    /// `fan_in` inputs.
    pub fn init_bounds(&self, layer: usize, fan_in: usize) -> Result<InitBounds> {
        use ActivationKind::*;
        if layer == 0 || fan_in == 0 {
            return Err(Error::InvalidArgument(format!(
                "init bounds need layer >= 1 and fan_in >= 1, got layer {layer}, fan_in {fan_in}"
            )));
        }
        self.validate()?;
        let n = fan_in as f64;
        let default_bias = (1.0 / n).sqrt();
        let siren_weight = if layer == 1 {
            1.0 / n
        } else {
            (6.0 / n).sqrt() / self.omega0
        };
        Ok(match self.kind {
            Sine | HSirenFirst => InitBounds::symmetric(siren_weight, default_bias),
            Finer => InitBounds::symmetric(siren_weight, self.k),
            WireGabor => InitBounds::symmetric((6.0 / n).sqrt() / self.omega0, default_bias),
            Relu | Identity => InitBounds::symmetric((6.0 / n).sqrt(), default_bias),
        })
    }
}

/// Gabor activation of `z = a + ib` split into real channels, with the
/// partial derivatives needed to backpropagate through it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborPartials {
    pub re: f64,
    pub im: f64,
    pub dre_da: f64,
    pub dre_db: f64,
    pub dim_da: f64,
    pub dim_db: f64,
}

/// `ψ(a + ib) = e^{-ω₀b - s₀²(a²+b²)} (cos ω₀a + i sin ω₀a)`.
#[inline]
pub fn gabor_partials(omega0: f64, s0: f64, a: f64, b: f64) -> GaborPartials {
    let s2 = s0 * s0;
    let m = (-omega0 * b - s2 * (a * a + b * b)).exp();
    let (s, c) = (omega0 * a).sin_cos();
    let (u, v) = (m * c, m * s);
    let ga = -2.0 * s2 * a;
    let gb = -omega0 - 2.0 * s2 * b;
    GaborPartials {
        re: u,
        im: v,
        dre_da: ga * u - omega0 * v,
        dre_db: gb * u,
        dim_da: ga * v + omega0 * u,
        dim_db: gb * v,
    }
}

/// `x / (1 - |x|)`, the closed form of `x + sgn(x)x² + x³ + sgn(x)x⁴ + …`
/// on `(-1, 1)`.
pub fn softsign_inverse(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "softsign inverse is defined on (-1, 1), got {x}"
        )));
    }
    Ok(x / (1.0 - x.abs()))
}
