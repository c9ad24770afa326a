//! Dense matrices, a seeded random source and the DFT magnitude used by the
//! spectrum analysis.

mod dft;
mod matrix;
mod rng;

pub use dft::{dft_magnitude, DftPlan};
pub use matrix::{
    matmul, matmul_nt, matmul_tn, matmul_with_workers, uniform_fill, ComplexMatrix, RealMatrix};
pub use rng::SeededRng;

use std::sync::OnceLock;

/// Worker count for the row-partitioned matrix product.
///
/// Read once from `INR_THREADS`; defaults to the available parallelism.
pub fn worker_count() -> usize {
    static WORKERS: OnceLock<usize> = OnceLock::new();
    *WORKERS.get_or_init(|| {
        let available = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1);
        match std::env::var("INR_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            Some(n) if n >= 1 => n.min(available.max(1)),
            _ => available,
        }
    })
}
