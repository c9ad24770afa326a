//! Reconstruction quality metrics and the per-run training log.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_congruent(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("{} values vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("metrics need at least one value".into()));
    }
    Ok(())
}

/// Mean squared difference.
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    check_congruent(a, b)?;
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    mse(a, b).map(f64::sqrt)
}

/// `10 log₁₀(peak² / mse)` in dB; identical inputs give `+∞`.
pub fn psnr(pred: &[f64], target: &[f64], peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(Error::InvalidArgument(format!("peak must be positive, got {peak}")));
    }
    Ok(psnr_from_mse(mse(pred, target)?, peak))
}

pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// Height, width and channel count of an interleaved (HWC) image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageShape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl ImageShape {
    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable 'valid' filtering of a `h x w` plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let (oh, ow) = (h + 1 - SSIM_WINDOW, w + 1 - SSIM_WINDOW);
    let mut horiz = vec![0.0; h * ow];
    for r in 0..h {
        let row = &plane[r * w..(r + 1) * w];
        for c in 0..ow {
            horiz[r * ow + c] = k.iter().zip(&row[c..c + SSIM_WINDOW]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for (t, kt) in k.iter().enumerate() {
            let src = &horiz[(r + t) * ow..(r + t + 1) * ow];
            for (o, s) in out[r * ow..(r + 1) * ow].iter_mut().zip(src) {
                *o += kt * s;
            }
        }
    }
    out
}

fn ssim_plane(x: &[f64], y: &[f64], h: usize, w: usize, peak: f64) -> f64 {
    let k = gaussian_kernel();
    let c1 = (0.01 * peak).powi(2);
    let c2 = (0.03 * peak).powi(2);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mu_x = filter_valid(x, h, w, &k);
    let mu_y = filter_valid(y, h, w, &k);
    let e_xx = filter_valid(&xx, h, w, &k);
    let e_yy = filter_valid(&yy, h, w, &k);
    let e_xy = filter_valid(&xy, h, w, &k);
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let vx = e_xx[i] - mx * mx;
            let vy = e_yy[i] - my * my;
            let cxy = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .sum();
    total / mu_x.len() as f64
}

/// Mean structural similarity over all valid 11x11 Gaussian windows
/// (σ = 1.5, `C1 = (0.01·peak)²`, `C2 = (0.03·peak)²`), computed per
/// channel and averaged.
pub fn ssim(pred: &[f64], target: &[f64], shape: ImageShape, peak: f64) -> Result<f64> {
    check_congruent(pred, target)?;
    if pred.len() != shape.len() {
        return Err(Error::Shape(format!(
            "{} values for a {}x{}x{} image",
            pred.len(),
            shape.height,
            shape.width,
            shape.channels
        )));
    }
    if shape.height < SSIM_WINDOW || shape.width < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}",
            shape.height, shape.width
        )));
    }
    if !(peak > 0.0) {
        return Err(Error::InvalidArgument(format!("peak must be positive, got {peak}")));
    }
    let (h, w, ch) = (shape.height, shape.width, shape.channels);
    let plane = |data: &[f64], c: usize| -> Vec<f64> { data.iter().skip(c).step_by(ch).copied().collect() };
    let sum: f64 = (0..ch)
        .map(|c| ssim_plane(&plane(pred, c), &plane(target, c), h, w, peak))
        .sum();
    Ok(sum / ch as f64)
}

/// One evaluation of held-out or full-resolution data during training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub iteration: usize,
    /// MSE in the normalized target space; used for best-checkpoint choice.
    pub mse: f64,
    pub psnr: f64,
    pub ssim: Option<f64>,
}

/// Per-iteration training loss, periodic evaluations and wall-clock time
/// per phase. Iteration `i` holds the loss of the parameters before the
/// `i`-th update; the final entry is the loss after the last update.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsLog {
    pub train_loss: Vec<f64>,
    pub eval: Vec<EvalRecord>,
    pub phase_seconds: Vec<(String, f64)>,
}

impl MetricsLog {
    pub fn record_loss(&mut self, loss: f64) {
        self.train_loss.push(loss);
    }

    pub fn record_eval(&mut self, record: EvalRecord) {
        debug_assert!(self.eval.last().is_none_or(|r| r.iteration < record.iteration));
        self.eval.push(record);
    }

    pub fn add_time(&mut self, phase: &str, seconds: f64) {
        match self.phase_seconds.iter_mut().find(|(p, _)| p == phase) {
            Some((_, s)) => *s += seconds,
            None => self.phase_seconds.push((phase.to_string(), seconds)),
        }
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.train_loss.last().copied()
    }

    pub fn last_eval(&self) -> Option<&EvalRecord> {
        self.eval.last()
    }

    /// Evaluation with the lowest MSE; ties keep the earliest.
    pub fn best_eval(&self) -> Option<&EvalRecord> {
        self.eval
            .iter()
            .fold(None, |best: Option<&EvalRecord>, r| match best {
                Some(b) if b.mse <= r.mse => Some(b),
                _ => Some(r),
            })
    }

    pub const CSV_HEADER: &'static str = "iteration,loss,psnr,ssim";

    /// Rows `iteration,loss,psnr,ssim`; evaluation columns are empty on
    /// iterations without an evaluation. Wall-clock times are excluded so
    /// seeded reruns produce identical text.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut evals = self.eval.iter().peekable();
        self.train_loss
            .iter()
            .enumerate()
            .map(|(i, loss)| {
                let mut line = format!("{i},{loss}");
                match evals.next_if(|r| r.iteration == i) {
                    Some(r) => {
                        let _ = write!(line, ",{}", r.psnr);
                        match r.ssim {
                            Some(s) => {
                                let _ = write!(line, ",{s}");
                            }
                            None => line.push(','),
                        }
                    }
                    None => line.push_str(",,"),
                }
                line
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in self.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}
