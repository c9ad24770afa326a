//! Coordinate grids, normalization, image and frame I/O, and datasets that
//! pair coordinates with target signals.

mod image;
mod synthetic;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use image::{
    center_crop, load_frames, load_image, save_frames, save_image, subsample_frames_stride2,
    subsample_stride2, ImageTensor,
};
pub use synthetic::textured_image;

use crate::error::{Error, Result};
use crate::metrics::{self, ImageShape, SSIM_WINDOW};
use crate::numkit::RealMatrix;

/// Coordinates of every cell of a regular grid, row-major over `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dims: Vec<usize>,
    coords: RealMatrix,
}

impl Grid {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn coords(&self) -> &RealMatrix {
        &self.coords
    }

    pub fn into_coords(self) -> RealMatrix {
        self.coords
    }
}

/// Position `i` of `n` equidistant points on `[-1, 1]`; a single point sits
/// at 0. Exactly antisymmetric about the middle index.
pub fn axis_coordinate(i: usize, n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let span = (n - 1) as f64;
    (2.0 * i as f64 - span) / span
}

pub fn build_grid(dims: &[usize]) -> Result<Grid> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("grid needs at least one axis".into()));
    }
    if let Some(pos) = dims.iter().position(|&n| n == 0) {
        return Err(Error::InvalidArgument(format!("axis {pos} has extent 0")));
    }
    let d = dims.len();
    let total: usize = dims.iter().product();
    let axes: Vec<Vec<f64>> = dims
        .iter()
        .map(|&n| (0..n).map(|i| axis_coordinate(i, n)).collect())
        .collect();
    let mut data = Vec::with_capacity(total * d);
    let mut index = vec![0usize; d];
    for _ in 0..total {
        data.extend(index.iter().zip(&axes).map(|(&i, axis)| axis[i]));
        for a in (0..d).rev() {
            index[a] += 1;
            if index[a] < dims[a] {
                break;
            }
            index[a] = 0;
        }
    }
    Ok(Grid {
        dims: dims.to_vec(),
        coords: RealMatrix::new(total, d, data)?,
    })
}

/// Affine map from `[lo, hi]` onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub lo: f64,
    pub hi: f64,
}

impl Normalization {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "normalization range [{lo}, {hi}] is degenerate"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Range of `values`.
    pub fn fit(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (lo, hi) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Self::new(lo, hi)
    }

    pub fn normalize(&self, v: f64) -> f64 {
        2.0 * (v - self.lo) / (self.hi - self.lo) - 1.0
    }

    pub fn denormalize(&self, y: f64) -> f64 {
        (y + 1.0) * 0.5 * (self.hi - self.lo) + self.lo
    }
}

pub fn normalize(values: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    let n = Normalization::new(lo, hi)?;
    Ok(values.iter().map(|&v| n.normalize(v)).collect())
}

pub fn denormalize(values: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    let n = Normalization::new(lo, hi)?;
    Ok(values.iter().map(|&v| n.denormalize(v)).collect())
}

/// How dataset rows map back onto a signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SignalLayout {
    Samples,
    Image {
        height: usize,
        width: usize,
        channels: usize,
    },
    Video {
        frames: usize,
        height: usize,
        width: usize,
        channels: usize,
    },
}

/// Quality of a prediction against a dataset's targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Mean squared error in target space.
    pub mse: f64,
    /// 8-bit scale (peak 255) for images and videos, peak 2 otherwise.
    pub psnr: f64,
    pub ssim: Option<f64>,
}

/// Coordinates paired with targets. Image and video targets are normalized
/// to `[-1, 1]`; raw sample datasets keep their values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    coords: RealMatrix,
    targets: RealMatrix,
    norm: Option<Normalization>,
    layout: SignalLayout,
}

impl Dataset {
    /// Unnormalized samples.
    pub fn from_samples(coords: RealMatrix, targets: RealMatrix) -> Result<Self> {
        if coords.rows() != targets.rows() {
            return Err(Error::Shape(format!(
                "{} coordinate rows vs {} target rows",
                coords.rows(),
                targets.rows()
            )));
        }
        if coords.rows() == 0 {
            return Err(Error::InvalidArgument("dataset is empty".into()));
        }
        if !coords.is_finite() || !targets.is_finite() {
            return Err(Error::NonFinite("dataset contains NaN or infinity".into()));
        }
        Ok(Self {
            coords,
            targets,
            norm: None,
            layout: SignalLayout::Samples,
        })
    }

    pub fn coords(&self) -> &RealMatrix {
        &self.coords
    }

    pub fn targets(&self) -> &RealMatrix {
        &self.targets
    }

    pub fn normalization(&self) -> Option<Normalization> {
        self.norm
    }

    pub fn layout(&self) -> SignalLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.coords.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.coords.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.targets.cols()
    }

    /// Rows at even spatial indices, keeping the coordinates of the full
    /// grid. Frames are untouched.
    pub fn subsample_stride2(&self) -> Result<Dataset> {
        let (frames, height, width, channels) = match self.layout {
            SignalLayout::Image { height, width, channels } => (1, height, width, channels),
            SignalLayout::Video { frames, height, width, channels } => (frames, height, width, channels),
            SignalLayout::Samples => {
                return Err(Error::InvalidArgument(
                    "stride-2 subsampling needs an image or video dataset".into(),
                ))
            }
        };
        let (h2, w2) = (height.div_ceil(2), width.div_ceil(2));
        let mut rows = Vec::with_capacity(frames * h2 * w2);
        for t in 0..frames {
            for y in (0..height).step_by(2) {
                for x in (0..width).step_by(2) {
                    rows.push((t * height + y) * width + x);
                }
            }
        }
        let layout = match self.layout {
            SignalLayout::Image { .. } => SignalLayout::Image { height: h2, width: w2, channels },
            _ => SignalLayout::Video { frames, height: h2, width: w2, channels },
        };
        Ok(Dataset {
            coords: self.coords.select_rows(&rows),
            targets: self.targets.select_rows(&rows),
            norm: self.norm,
            layout,
        })
    }

    fn pixel_values(&self, values: &RealMatrix) -> Vec<f64> {
        let norm = self.norm.expect("pixel datasets are normalized");
        values
            .data()
            .iter()
            .map(|&v| norm.denormalize(v).clamp(0.0, 255.0))
            .collect()
    }

    /// MSE in target space; PSNR and SSIM on the denormalized 8-bit scale
    /// with predictions clamped to `[0, 255]`.
    pub fn evaluate(&self, pred: &RealMatrix) -> Result<Evaluation> {
        if pred.shape() != self.targets.shape() {
            return Err(Error::Shape(format!(
                "prediction {:?} vs targets {:?}",
                pred.shape(),
                self.targets.shape()
            )));
        }
        let mse = metrics::mse(pred.data(), self.targets.data())?;
        let (frames, shape) = match self.layout {
            SignalLayout::Samples => {
                return Ok(Evaluation {
                    mse,
                    psnr: metrics::psnr_from_mse(mse, 2.0),
                    ssim: None,
                })
            }
            SignalLayout::Image { height, width, channels } => (1, ImageShape { height, width, channels }),
            SignalLayout::Video { frames, height, width, channels } => {
                (frames, ImageShape { height, width, channels })
            }
        };
        let p = self.pixel_values(pred);
        let t = self.pixel_values(&self.targets);
        let psnr = metrics::psnr(&p, &t, 255.0)?;
        let ssim = if shape.height >= SSIM_WINDOW && shape.width >= SSIM_WINDOW {
            let n = shape.len();
            let mut sum = 0.0;
            for f in 0..frames {
                sum += metrics::ssim(&p[f * n..(f + 1) * n], &t[f * n..(f + 1) * n], shape, 255.0)?;
            }
            Some(sum / frames as f64)
        } else {
            None
        };
        Ok(Evaluation { mse, psnr, ssim })
    }

    /// Predictions rounded back to 8-bit frames.
    pub fn reconstruct(&self, pred: &RealMatrix) -> Result<Vec<ImageTensor>> {
        let (frames, height, width, channels) = match self.layout {
            SignalLayout::Image { height, width, channels } => (1, height, width, channels),
            SignalLayout::Video { frames, height, width, channels } => (frames, height, width, channels),
            SignalLayout::Samples => {
                return Err(Error::InvalidArgument("samples cannot be rendered as images".into()))
            }
        };
        if pred.shape() != self.targets.shape() {
            return Err(Error::Shape(format!(
                "prediction {:?} vs targets {:?}",
                pred.shape(),
                self.targets.shape()
            )));
        }
        let bytes: Vec<u8> = self.pixel_values(pred).iter().map(|v| v.round() as u8).collect();
        let n = height * width * channels;
        (0..frames)
            .map(|f| ImageTensor::new(height, width, channels, bytes[f * n..(f + 1) * n].to_vec()))
            .collect()
    }

    /// Header of coordinate columns then target columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.input_dim())
            .map(|i| format!("coord_{i}"))
            .chain((0..self.output_dim()).map(|i| format!("target_{i}")))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in 0..self.len() {
            let fields: Vec<String> = self
                .coords
                .row(r)
                .iter()
                .chain(self.targets.row(r))
                .map(f64::to_string)
                .collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn check_frames(frames: &[ImageTensor]) -> Result<(usize, usize, usize)> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidArgument("no frames given".into()))?;
    let shape = (first.height(), first.width(), first.channels());
    if let Some(i) = frames
        .iter()
        .position(|f| (f.height(), f.width(), f.channels()) != shape)
    {
        return Err(Error::Shape(format!(
            "frame {i} is {}x{}x{}, frame 0 is {}x{}x{}",
            frames[i].height(),
            frames[i].width(),
            frames[i].channels(),
            shape.0,
            shape.1,
            shape.2
        )));
    }
    Ok(shape)
}

fn pixel_dataset(
    frames: &[ImageTensor],
    norm: Option<Normalization>,
    video: bool,
) -> Result<Dataset> {
    let (height, width, channels) = check_frames(frames)?;
    let norm = match norm {
        Some(n) => n,
        None => Normalization::fit(frames.iter().flat_map(|f| f.pixels().iter().map(|&p| f64::from(p))))?,
    };
    let (dims, layout) = if video {
        (
            vec![frames.len(), height, width],
            SignalLayout::Video { frames: frames.len(), height, width, channels },
        )
    } else {
        (vec![height, width], SignalLayout::Image { height, width, channels })
    };
    let grid = build_grid(&dims)?;
    let data: Vec<f64> = frames
        .iter()
        .flat_map(|f| f.pixels().iter().map(|&p| norm.normalize(f64::from(p))))
        .collect();
    Ok(Dataset {
        coords: grid.into_coords(),
        targets: RealMatrix::new(frames.len() * height * width, channels, data)?,
        norm: Some(norm),
        layout,
    })
}

/// Pixel grid `(y, x)` to colour, normalized by the image's own range.
pub fn image_to_dataset(img: &ImageTensor) -> Result<Dataset> {
    pixel_dataset(std::slice::from_ref(img), None, false)
}

/// As [`image_to_dataset`] with a given normalization.
pub fn image_to_dataset_with(img: &ImageTensor, norm: Normalization) -> Result<Dataset> {
    pixel_dataset(std::slice::from_ref(img), Some(norm), false)
}

/// Grid `(t, y, x)` to colour over all frames, normalized by their joint
/// range.
pub fn frames_to_dataset(frames: &[ImageTensor]) -> Result<Dataset> {
    pixel_dataset(frames, None, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::SeededRng;

    #[test]
    fn one_axis_grids() {
        let g = build_grid(&[3]).unwrap();
        assert_eq!(g.coords().data(), &[-1.0, 0.0, 1.0]);
        let g = build_grid(&[1]).unwrap();
        assert_eq!(g.coords().data(), &[0.0]);
        let g = build_grid(&[200]).unwrap();
        let c = g.coords().data();
        assert_eq!((c[0], c[199]), (-1.0, 1.0));
        assert!(c.iter().all(|&v| v != 0.0));
        for w in c.windows(2) {
            assert!((w[1] - w[0] - 2.0 / 199.0).abs() < 1e-15);
        }
        for i in 0..200 {
            assert_eq!(c[i], -c[199 - i]);
        }
    }

    #[test]
    fn corner_grid_is_row_major() {
        let g = build_grid(&[2, 2]).unwrap();
        assert_eq!(g.coords().data(), &[-1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0]);
        let g = build_grid(&[2, 3, 4]).unwrap();
        assert_eq!(g.coords().shape(), (24, 3));
        assert_eq!(g.coords().row(5), &[-1.0, 0.0, -1.0 / 3.0]);
    }

    #[test]
    fn grid_rejects_bad_dims() {
        assert!(build_grid(&[]).is_err());
        assert!(build_grid(&[3, 0]).is_err());
    }

    #[test]
    fn pixel_normalization() {
        let n = Normalization::new(0.0, 255.0).unwrap();
        assert_eq!(n.normalize(0.0), -1.0);
        assert_eq!(n.normalize(255.0), 1.0);
        assert!((n.normalize(51.0) + 0.6).abs() < 1e-15);
        for p in 0..=255u8 {
            let v = f64::from(p);
            assert_eq!(n.denormalize(n.normalize(v)).round(), v);
        }
        assert!(Normalization::new(1.0, 1.0).is_err());
        assert!(normalize(&[1.0], 2.0, 1.0).is_err());
    }

    #[test]
    fn normalization_round_trip() {
        let mut rng = SeededRng::new(8);
        let v: Vec<f64> = (0..1000).map(|_| rng.uniform(-50.0, 80.0)).collect();
        let y = normalize(&v, -50.0, 80.0).unwrap();
        assert!(y.iter().all(|v| (-1.0..=1.0).contains(v)));
        let back = denormalize(&y, -50.0, 80.0).unwrap();
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn tiny_image() -> ImageTensor {
        ImageTensor::new(2, 2, 3, (0..12).map(|i| (i * 20) as u8).collect()).unwrap()
    }

    #[test]
    fn image_dataset_shapes() {
        let ds = image_to_dataset(&tiny_image()).unwrap();
        assert_eq!((ds.len(), ds.input_dim(), ds.output_dim()), (4, 2, 3));
        assert_eq!(ds.coords().row(0), &[-1.0, -1.0]);
        assert_eq!(ds.targets().get(0, 0), -1.0);
        assert_eq!(ds.targets().get(3, 2), 1.0);
        let frames = vec![tiny_image(); 3];
        let v = frames_to_dataset(&frames).unwrap();
        assert_eq!((v.len(), v.input_dim()), (12, 3));
        let odd = ImageTensor::new(2, 3, 3, vec![0; 18]).unwrap();
        assert!(frames_to_dataset(&[tiny_image(), odd]).is_err());
    }

    #[test]
    fn reconstruct_restores_pixels() {
        let img = tiny_image();
        let ds = image_to_dataset(&img).unwrap();
        let back = ds.reconstruct(ds.targets()).unwrap();
        assert_eq!(back, vec![img]);
        let e = ds.evaluate(ds.targets()).unwrap();
        assert_eq!(e.mse, 0.0);
        assert_eq!(e.psnr, f64::INFINITY);
        assert_eq!(e.ssim, None);
    }

    #[test]
    fn dataset_subsample_keeps_fine_coordinates() {
        let img = ImageTensor::new(4, 4, 1, (0..16).map(|i| i as u8 * 10).collect()).unwrap();
        let ds = image_to_dataset(&img).unwrap();
        let sub = ds.subsample_stride2().unwrap();
        assert_eq!(sub.len(), 4);
        assert_eq!(sub.coords().row(1), &[-1.0, 1.0 / 3.0]);
        let want = image_to_dataset_with(&subsample_stride2(&img).unwrap(), ds.normalization().unwrap())
            .unwrap();
        assert_eq!(sub.targets(), want.targets());
    }

    #[test]
    fn csv_has_coordinate_then_target_columns() {
        let ds = image_to_dataset(&tiny_image()).unwrap();
        let csv = ds.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("coord_0,coord_1,target_0,target_1,target_2"));
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn samples_dataset_checks_rows() {
        let c = RealMatrix::zeros(3, 1);
        assert!(Dataset::from_samples(c.clone(), RealMatrix::zeros(2, 1)).is_err());
        let ds = Dataset::from_samples(c, RealMatrix::zeros(3, 1)).unwrap();
        assert!(ds.subsample_stride2().is_err());
        assert_eq!(ds.evaluate(&RealMatrix::zeros(3, 1)).unwrap().psnr, f64::INFINITY);
    }
}
