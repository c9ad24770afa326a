use std::f64::consts::PI;

use super::ImageTensor;
use crate::error::{Error, Result};
use crate::numkit::SeededRng;

const GRATINGS: usize = 8;
const DISCS: usize = 4;

/// Deterministic RGB test image mixing oriented gratings (2 to 24 cycles per
/// side) with sharp-edged discs. Each `variant` gives a different image.
pub fn textured_image(variant: u64, size: usize) -> Result<ImageTensor> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!("image size must be at least 2, got {size}")));
    }
    let mut rng = SeededRng::new(0x7e47_0000 + variant);
    let gratings: Vec<_> = (0..GRATINGS)
        .map(|_| {
            let freq = rng.uniform(2.0, 24.0);
            let angle = rng.uniform(0.0, PI);
            let phase = rng.uniform(0.0, 2.0 * PI);
            let mix = [rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)];
            (freq * angle.cos(), freq * angle.sin(), phase, mix)
        })
        .collect();
    let discs: Vec<_> = (0..DISCS)
        .map(|_| {
            let cy = rng.uniform(0.15, 0.85);
            let cx = rng.uniform(0.15, 0.85);
            let radius = rng.uniform(0.08, 0.25);
            let level = [rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)];
            (cy, cx, radius, level)
        })
        .collect();

    let mut values = Vec::with_capacity(size * size * 3);
    let step = 1.0 / size as f64;
    for y in 0..size {
        let v = (y as f64 + 0.5) * step;
        for x in 0..size {
            let u = (x as f64 + 0.5) * step;
            for c in 0..3 {
                let mut s: f64 = gratings
                    .iter()
                    .map(|&(fx, fy, phase, mix)| mix[c] * (2.0 * PI * (fx * u + fy * v) + phase).sin())
                    .sum();
                for &(cy, cx, radius, level) in &discs {
                    if (u - cx).powi(2) + (v - cy).powi(2) < radius * radius {
                        s += level[c];
                    }
                }
                values.push(s);
            }
        }
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pixels = values
        .iter()
        .map(|v| (255.0 * (v - lo) / (hi - lo)).round() as u8)
        .collect();
    ImageTensor::new(size, size, 3, pixels)
}
