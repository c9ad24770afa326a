//! Batched forward pass with cached slopes and exact reverse-mode gradients.
//!
//! Rows of every matrix are samples. A hidden layer computes
//! `x = z Wᵀ + b` followed by its activation. WIRE layers carry complex
//! values as a pair of real channels `(re, im)`; the output layer reads the
//! real channel only.

use super::{fourier_encode, LayerParams, ModelConfig, Params};
use crate::activations::{gabor_partials, ActivationKind, ActivationSpec};
use crate::error::{Error, Result};
use crate::numkit::{matmul, matmul_nt, matmul_tn, ComplexMatrix, RealMatrix};

/// Values saved by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    generation: u64,
    rows: usize,
    hidden: Vec<HiddenCache>,
    output_input: RealMatrix,
}

impl ForwardCache {
    pub fn rows(&self) -> usize {
        self.rows
    }
}

#[derive(Debug, Clone)]
enum HiddenCache {
    /// Layer input and the activation slope `f'(x)`.
    Real { input: RealMatrix, slope: RealMatrix },
    /// Real-input Gabor layer: slopes of both output channels in `x`.
    GaborReal {
        input: RealMatrix,
        dre: RealMatrix,
        dim: RealMatrix,
    },
    /// Complex Gabor layer on `a + ib`.
    GaborComplex {
        input_re: RealMatrix,
        input_im: RealMatrix,
        dre_da: RealMatrix,
        dre_db: RealMatrix,
        dim_da: RealMatrix,
        dim_db: RealMatrix,
    },
}

struct Signal {
    re: RealMatrix,
    im: Option<RealMatrix>,
}

fn affine(input: &RealMatrix, weight: &RealMatrix, bias: &[f64]) -> Result<RealMatrix> {
    let mut x = matmul_nt(input, weight)?;
    x.add_row_vector(bias)?;
    Ok(x)
}

fn split_bias(bias: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (
        bias.iter().step_by(2).copied().collect(),
        bias.iter().skip(1).step_by(2).copied().collect(),
    )
}

fn interleave(re: &[f64], im: &[f64]) -> Vec<f64> {
    re.iter().zip(im).flat_map(|(&a, &b)| [a, b]).collect()
}

fn check_input(params: &Params, config: &ModelConfig, coords: &RealMatrix) -> Result<()> {
    params.check_matches(config)?;
    if coords.cols() != config.input_dim {
        return Err(Error::Shape(format!(
            "coords have {} columns, model expects {}",
            coords.cols(),
            config.input_dim
        )));
    }
    Ok(())
}

/// Applies `spec` in place; returns the slope matrix when `keep_slope`.
fn activate_real(x: &mut RealMatrix, spec: &ActivationSpec, keep_slope: bool) -> Option<RealMatrix> {
    if keep_slope {
        let mut slope = RealMatrix::zeros(x.rows(), x.cols());
        for (v, s) in x.data_mut().iter_mut().zip(slope.data_mut()) {
            let (a, d) = spec.apply_with_derivative(*v);
            *v = a;
            *s = d;
        }
        Some(slope)
    } else {
        for v in x.data_mut() {
            *v = spec.apply(*v);
        }
        None
    }
}

fn run_forward(
    params: &Params,
    config: &ModelConfig,
    coords: &RealMatrix,
    keep_cache: bool,
    mut visit: impl FnMut(usize, &RealMatrix),
) -> Result<(RealMatrix, Option<ForwardCache>)> {
    check_input(params, config, coords)?;
    let layers = params.layers();
    let depth = config.hidden_depth;
    let mut hidden = Vec::with_capacity(if keep_cache { depth } else { 0 });
    let mut signal = Signal {
        re: fourier_encode(coords, config.pe_bands),
        im: None,
    };

    for (i, layer) in layers[..depth].iter().enumerate() {
        let spec = config.hidden_activation(i + 1)?;
        let input = signal;
        signal = match (layer, spec.kind) {
            (LayerParams::Real { weight, bias }, ActivationKind::WireGabor) => {
                let a = affine(&input.re, weight, bias)?;
                let mut re = RealMatrix::zeros(a.rows(), a.cols());
                let mut im = RealMatrix::zeros(a.rows(), a.cols());
                let mut dre = keep_cache.then(|| RealMatrix::zeros(a.rows(), a.cols()));
                let mut dim = keep_cache.then(|| RealMatrix::zeros(a.rows(), a.cols()));
                for (j, &av) in a.data().iter().enumerate() {
                    let p = gabor_partials(spec.omega0, spec.s0, av, 0.0);
                    re.data_mut()[j] = p.re;
                    im.data_mut()[j] = p.im;
                    if let (Some(dr), Some(di)) = (dre.as_mut(), dim.as_mut()) {
                        dr.data_mut()[j] = p.dre_da;
                        di.data_mut()[j] = p.dim_da;
                    }
                }
                if keep_cache {
                    hidden.push(HiddenCache::GaborReal {
                        input: input.re,
                        dre: dre.unwrap(),
                        dim: dim.unwrap(),
                    });
                }
                Signal { re, im: Some(im) }
            }
            (LayerParams::Real { weight, bias }, _) => {
                let mut x = affine(&input.re, weight, bias)?;
                let slope = activate_real(&mut x, &spec, keep_cache);
                if let Some(slope) = slope {
                    hidden.push(HiddenCache::Real {
                        input: input.re,
                        slope,
                    });
                }
                Signal { re: x, im: None }
            }
            (LayerParams::Complex { weight, bias }, ActivationKind::WireGabor) => {
                let zr = &input.re;
                let zi = input
                    .im
                    .as_ref()
                    .ok_or_else(|| Error::Shape("complex layer fed a real signal".into()))?;
                let (wr, wi) = weight.split();
                let (br, bi) = split_bias(bias);
                let mut a = matmul_nt(zr, &wr)?;
                let zi_wi = matmul_nt(zi, &wi)?;
                for (v, s) in a.data_mut().iter_mut().zip(zi_wi.data()) {
                    *v -= s;
                }
                a.add_row_vector(&br)?;
                let mut b = matmul_nt(zr, &wi)?;
                let zi_wr = matmul_nt(zi, &wr)?;
                for (v, s) in b.data_mut().iter_mut().zip(zi_wr.data()) {
                    *v += s;
                }
                b.add_row_vector(&bi)?;
                let (rows, cols) = a.shape();
                let mut re = RealMatrix::zeros(rows, cols);
                let mut im = RealMatrix::zeros(rows, cols);
                let mut partials = keep_cache.then(|| {
                    [(); 4].map(|_| RealMatrix::zeros(rows, cols))
                });
                for j in 0..rows * cols {
                    let p = gabor_partials(spec.omega0, spec.s0, a.data()[j], b.data()[j]);
                    re.data_mut()[j] = p.re;
                    im.data_mut()[j] = p.im;
                    if let Some(m) = partials.as_mut() {
                        m[0].data_mut()[j] = p.dre_da;
                        m[1].data_mut()[j] = p.dre_db;
                        m[2].data_mut()[j] = p.dim_da;
                        m[3].data_mut()[j] = p.dim_db;
                    }
                }
                if let Some([dre_da, dre_db, dim_da, dim_db]) = partials {
                    hidden.push(HiddenCache::GaborComplex {
                        input_re: input.re,
                        input_im: input.im.unwrap(),
                        dre_da,
                        dre_db,
                        dim_da,
                        dim_db,
                    });
                }
                Signal { re, im: Some(im) }
            }
            (LayerParams::Complex { .. }, kind) => {
                return Err(Error::Shape(format!(
                    "complex weights with real activation {kind:?}"
                )))
            }
        };
        visit(i + 1, &signal.re);
    }

    let LayerParams::Real { weight, bias } = &layers[depth] else {
        return Err(Error::Shape("output layer must be real".into()));
    };
    let out = affine(&signal.re, weight, bias)?;
    let cache = keep_cache.then(|| ForwardCache {
        generation: params.generation(),
        rows: coords.rows(),
        hidden,
        output_input: signal.re,
    });
    Ok((out, cache))
}

/// Network output for `coords` (`N x input_dim`) with the cache needed for
/// [`backward`]. The output layer is linear.
pub fn forward(
    params: &Params,
    config: &ModelConfig,
    coords: &RealMatrix,
) -> Result<(RealMatrix, ForwardCache)> {
    let (out, cache) = run_forward(params, config, coords, true, |_, _| {})?;
    Ok((out, cache.expect("cache requested")))
}

/// Network output without keeping intermediate values.
pub fn predict(params: &Params, config: &ModelConfig, coords: &RealMatrix) -> Result<RealMatrix> {
    Ok(run_forward(params, config, coords, false, |_, _| {})?.0)
}

/// Runs the network and hands each hidden layer's output (real channel) to
/// `visit` as `(layer, N x width)`, layer numbering from 1.
pub fn visit_hidden_outputs(
    params: &Params,
    config: &ModelConfig,
    coords: &RealMatrix,
    visit: impl FnMut(usize, &RealMatrix),
) -> Result<RealMatrix> {
    Ok(run_forward(params, config, coords, false, visit)?.0)
}

fn hadamard_into(target: &mut RealMatrix, factor: &RealMatrix) {
    for (t, f) in target.data_mut().iter_mut().zip(factor.data()) {
        *t *= f;
    }
}

/// Gradients of a scalar loss with respect to every parameter, given the
/// loss gradient with respect to the network output.
pub fn backward(
    params: &Params,
    config: &ModelConfig,
    cache: &ForwardCache,
    output_grad: &RealMatrix,
) -> Result<Params> {
    if cache.generation != params.generation() {
        return Err(Error::StaleCache(
            "parameters changed since the forward pass".into(),
        ));
    }
    params.check_matches(config)?;
    if output_grad.shape() != (cache.rows, config.output_dim) {
        return Err(Error::Shape(format!(
            "output gradient is {:?}, expected ({}, {})",
            output_grad.shape(),
            cache.rows,
            config.output_dim
        )));
    }
    let layers = params.layers();
    let depth = config.hidden_depth;
    let mut grads: Vec<Option<LayerParams>> = vec![None; depth + 1];

    let LayerParams::Real { weight, .. } = &layers[depth] else {
        return Err(Error::Shape("output layer must be real".into()));
    };
    grads[depth] = Some(LayerParams::Real {
        weight: matmul_tn(output_grad, &cache.output_input)?,
        bias: output_grad.column_sums(),
    });
    let mut grad_re = matmul(output_grad, weight)?;
    let mut grad_im: Option<RealMatrix> = None;

    for i in (0..depth).rev() {
        let need_input_grad = i > 0;
        match (&cache.hidden[i], &layers[i]) {
            (HiddenCache::Real { input, slope }, LayerParams::Real { weight, .. }) => {
                let mut dx = grad_re;
                hadamard_into(&mut dx, slope);
                grads[i] = Some(LayerParams::Real {
                    weight: matmul_tn(&dx, input)?,
                    bias: dx.column_sums(),
                });
                grad_re = if need_input_grad {
                    matmul(&dx, weight)?
                } else {
                    RealMatrix::zeros(0, 0)
                };
                grad_im = None;
            }
            (HiddenCache::GaborReal { input, dre, dim }, LayerParams::Real { weight, .. }) => {
                let mut da = grad_re;
                hadamard_into(&mut da, dre);
                if let Some(gv) = &grad_im {
                    for ((d, g), s) in da.data_mut().iter_mut().zip(gv.data()).zip(dim.data()) {
                        *d += g * s;
                    }
                }
                grads[i] = Some(LayerParams::Real {
                    weight: matmul_tn(&da, input)?,
                    bias: da.column_sums(),
                });
                grad_re = if need_input_grad {
                    matmul(&da, weight)?
                } else {
                    RealMatrix::zeros(0, 0)
                };
                grad_im = None;
            }
            (
                HiddenCache::GaborComplex {
                    input_re,
                    input_im,
                    dre_da,
                    dre_db,
                    dim_da,
                    dim_db,
                },
                LayerParams::Complex { weight, .. },
            ) => {
                let (rows, cols) = dre_da.shape();
                let mut ga = RealMatrix::zeros(rows, cols);
                let mut gb = RealMatrix::zeros(rows, cols);
                for j in 0..rows * cols {
                    let gu = grad_re.data()[j];
                    let gv = grad_im.as_ref().map_or(0.0, |m| m.data()[j]);
                    ga.data_mut()[j] = gu * dre_da.data()[j] + gv * dim_da.data()[j];
                    gb.data_mut()[j] = gu * dre_db.data()[j] + gv * dim_db.data()[j];
                }
                let mut dwr = matmul_tn(&ga, input_re)?;
                let gb_zi = matmul_tn(&gb, input_im)?;
                for (v, s) in dwr.data_mut().iter_mut().zip(gb_zi.data()) {
                    *v += s;
                }
                let mut dwi = matmul_tn(&gb, input_re)?;
                let ga_zi = matmul_tn(&ga, input_im)?;
                for (v, s) in dwi.data_mut().iter_mut().zip(ga_zi.data()) {
                    *v -= s;
                }
                grads[i] = Some(LayerParams::Complex {
                    weight: ComplexMatrix::from_parts(&dwr, &dwi)?,
                    bias: interleave(&ga.column_sums(), &gb.column_sums()),
                });
                let (wr, wi) = weight.split();
                let mut dzr = matmul(&ga, &wr)?;
                let gb_wi = matmul(&gb, &wi)?;
                for (v, s) in dzr.data_mut().iter_mut().zip(gb_wi.data()) {
                    *v += s;
                }
                let mut dzi = matmul(&gb, &wr)?;
                let ga_wi = matmul(&ga, &wi)?;
                for (v, s) in dzi.data_mut().iter_mut().zip(ga_wi.data()) {
                    *v -= s;
                }
                grad_re = dzr;
                grad_im = Some(dzi);
            }
            _ => {
                return Err(Error::StaleCache(format!(
                    "cache entry for layer {} does not match its parameters",
                    i + 1
                )))
            }
        }
    }
    Params::from_layers(grads.into_iter().map(|g| g.expect("all layers visited")).collect())
}

/// Mean squared error over all entries and its gradient with respect to
/// `pred`.
pub fn mse_loss(pred: &RealMatrix, target: &RealMatrix) -> Result<(f64, RealMatrix)> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let count = pred.data().len().max(1) as f64;
    let mut grad = RealMatrix::zeros(pred.rows(), pred.cols());
    let mut sum = 0.0;
    for ((g, p), t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let d = p - t;
        sum += d * d;
        *g = 2.0 * d / count;
    }
    Ok((sum / count, grad))
}
