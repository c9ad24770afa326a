use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{worker_count, SeededRng};
use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Adds `bias[c]` to every entry of column `c`.
    pub fn add_row_vector(&mut self, bias: &[f64]) -> Result<()> {
        if bias.len() != self.cols {
            return Err(Error::Shape(format!(
                "bias of length {} for {} columns",
                bias.len(),
                self.cols
            )));
        }
        for row in self.data.chunks_exact_mut(self.cols.max(1)) {
            for (v, b) in row.iter_mut().zip(bias) {
                *v += b;
            }
        }
        Ok(())
    }

    /// Column sums, accumulated in row order.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols.max(1)) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Horizontal concatenation.
    pub fn hstack(parts: &[&RealMatrix]) -> Result<Self> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if parts.iter().any(|m| m.rows != rows) {
            return Err(Error::Shape("hstack operands differ in row count".into()));
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for m in parts {
                data.extend_from_slice(m.row(r));
            }
        }
        Ok(Self { rows, cols, data })
    }
}

/// Row-major dense matrix of complex numbers stored as interleaved
/// `(re, im)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; 2 * rows * cols],
        }
    }

    /// Interleaves a real and an imaginary part of identical shape.
    pub fn from_parts(re: &RealMatrix, im: &RealMatrix) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::Shape(format!(
                "real part {:?} vs imaginary part {:?}",
                re.shape(),
                im.shape()
            )));
        }
        let data = re
            .data()
            .iter()
            .zip(im.data())
            .flat_map(|(&a, &b)| [a, b])
            .collect();
        Ok(Self {
            rows: re.rows(),
            cols: re.cols(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let i = 2 * (r * self.cols + c);
        Complex64::new(self.data[i], self.data[i + 1])
    }

    pub fn set(&mut self, r: usize, c: usize, z: Complex64) {
        let i = 2 * (r * self.cols + c);
        self.data[i] = z.re;
        self.data[i + 1] = z.im;
    }

    /// Interleaved `(re, im)` storage.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Splits into real and imaginary matrices.
    pub fn split(&self) -> (RealMatrix, RealMatrix) {
        let re = self.data.iter().step_by(2).copied().collect();
        let im = self.data.iter().skip(1).step_by(2).copied().collect();
        (
            RealMatrix {
                rows: self.rows,
                cols: self.cols,
                data: re,
            },
            RealMatrix {
                rows: self.rows,
                cols: self.cols,
                data: im,
            },
        )
    }
}

#[derive(Clone, Copy)]
struct Operand<'a> {
    data: &'a [f64],
    row_stride: isize,
    col_stride: isize,
}

fn operand(m: &RealMatrix, transposed: bool) -> Operand<'_> {
    if transposed {
        Operand {
            data: &m.data,
            row_stride: 1,
            col_stride: m.cols as isize,
        }
    } else {
        Operand {
            data: &m.data,
            row_stride: m.cols as isize,
            col_stride: 1,
        }
    }
}

/// Minimum output rows per worker before the product is split.
const ROWS_PER_WORKER: usize = 64;

fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: Operand<'_>,
    b: Operand<'_>,
    workers: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    let workers = workers.clamp(1, m.div_ceil(ROWS_PER_WORKER).max(1));
    let chunk_rows = m.div_ceil(workers);
    let block = |first_row: usize, c: &mut [f64]| {
        let rows = c.len() / n;
        let offset = first_row as isize * a.row_stride;
        // SAFETY: `a` addresses `m x k` elements through its strides and `b`
        // addresses `k x n`; both slices were sized by their owning matrices.
        // `offset` selects rows `first_row..first_row + rows` of op(a), all
        // of which are below `m`, and `c` has exactly `rows x n` elements.
        unsafe {
            matrixmultiply::dgemm(
                rows,
                k,
                n,
                1.0,
                a.data.as_ptr().offset(offset),
                a.row_stride,
                a.col_stride,
                b.data.as_ptr(),
                b.row_stride,
                b.col_stride,
                0.0,
                c.as_mut_ptr(),
                n as isize,
                1,
            );
        }
    };
    if workers == 1 {
        block(0, &mut out);
    } else {
        // Each output row depends only on its own row of op(a), so the
        // partition does not change any reduction order.
        std::thread::scope(|s| {
            for (i, c) in out.chunks_mut(chunk_rows * n).enumerate() {
                let block = &block;
                s.spawn(move || block(i * chunk_rows, c));
            }
        });
    }
    out
}

fn product(
    a: &RealMatrix,
    ta: bool,
    b: &RealMatrix,
    tb: bool,
    workers: usize,
) -> Result<RealMatrix> {
    let (m, k) = if ta { (a.cols, a.rows) } else { (a.rows, a.cols) };
    let (k2, n) = if tb { (b.cols, b.rows) } else { (b.rows, b.cols) };
    if k != k2 {
        return Err(Error::Shape(format!(
            "cannot multiply {m}x{k} by {k2}x{n}"
        )));
    }
    let data = gemm(m, k, n, operand(a, ta), operand(b, tb), workers);
    Ok(RealMatrix {
        rows: m,
        cols: n,
        data,
    })
}

/// `a · b`.
pub fn matmul(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    product(a, false, b, false, worker_count())
}

/// `a · bᵀ`.
pub fn matmul_nt(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    product(a, false, b, true, worker_count())
}

/// `aᵀ · b`.
pub fn matmul_tn(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    product(a, true, b, false, worker_count())
}

/// `a · b` with an explicit worker count; the result is bit-identical for
/// every count.
pub fn matmul_with_workers(a: &RealMatrix, b: &RealMatrix, workers: usize) -> Result<RealMatrix> {
    product(a, false, b, false, workers)
}

/// Fills a `rows x cols` matrix with draws from `U[lo, hi)`.
pub fn uniform_fill(
    rng: &mut SeededRng,
    rows: usize,
    cols: usize,
    lo: f64,
    hi: f64,
) -> Result<RealMatrix> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "uniform bounds must satisfy lo < hi, got [{lo}, {hi})"
        )));
    }
    let data = (0..rows * cols).map(|_| rng.uniform(lo, hi)).collect();
    Ok(RealMatrix { rows, cols, data })
}
