use std::f64::consts::PI;

use crate::numkit::RealMatrix;

/// Positional encoding: the raw coordinates followed, for each band
/// `j = 0..bands`, by `sin(2^j π c)` then `cos(2^j π c)` for every channel.
///
/// Output width is `d · (1 + 2·bands)`; `bands = 0` returns the input.
pub fn fourier_encode(coords: &RealMatrix, bands: usize) -> RealMatrix {
    if bands == 0 {
        return coords.clone();
    }
    let d = coords.cols();
    let width = d * (1 + 2 * bands);
    let mut data = Vec::with_capacity(coords.rows() * width);
    for r in 0..coords.rows() {
        let row = coords.row(r);
        data.extend_from_slice(row);
        for j in 0..bands {
            let freq = (1u64 << j) as f64 * PI;
            let (sins, coss): (Vec<f64>, Vec<f64>) =
                row.iter().map(|&c| (freq * c).sin_cos()).unzip();
            data.extend(sins);
            data.extend(coss);
        }
    }
    RealMatrix::new(coords.rows(), width, data).expect("encoded width is consistent")
}
