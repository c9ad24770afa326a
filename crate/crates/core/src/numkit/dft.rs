use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Magnitudes of the discrete Fourier transform
/// `X_k = Σ_n x_n e^{-2πi kn/N}` at bins `0..=N/2`.
pub fn dft_magnitude(signal: &[f64]) -> Result<Vec<f64>> {
    Ok(DftPlan::new(signal.len())?.magnitude(signal))
}

/// A reusable transform for many signals of one length.
pub struct DftPlan {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl DftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidArgument(format!(
                "DFT needs at least 2 samples, got {len}"
            )));
        }
        let fft = FftPlanner::new().plan_fft_forward(len);
        Ok(Self { len, fft })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of output bins, `N/2 + 1`.
    pub fn bins(&self) -> usize {
        self.len / 2 + 1
    }

    /// Panics if `signal.len()` differs from the planned length.
    pub fn magnitude(&self, signal: &[f64]) -> Vec<f64> {
        assert_eq!(signal.len(), self.len, "signal length differs from plan");
        let mut buf: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        buf[..self.bins()].iter().map(|z| z.norm()).collect()
    }

    /// Adds the bin magnitudes of `signal` into `acc`, using `buf` as
    /// workspace. Panics on a length mismatch.
    pub fn add_magnitude(
        &self,
        signal: impl Iterator<Item = f64>,
        buf: &mut Vec<Complex64>,
        acc: &mut [f64],
    ) {
        buf.clear();
        buf.extend(signal.map(|v| Complex64::new(v, 0.0)));
        assert_eq!(buf.len(), self.len, "signal length differs from plan");
        assert_eq!(acc.len(), self.bins(), "accumulator length differs from bins");
        self.fft.process(buf);
        for (a, z) in acc.iter_mut().zip(buf.iter()) {
            *a += z.norm();
        }
    }
}
