//! A small dense row-major matrix.
//!
//! Allocation matrices here are tiny (agents x loss factors), so a flat
//! `Vec<f64>` with explicit loops beats pulling in a linear-algebra stack.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense row-major `rows x cols` matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from rows. All rows must have equal, nonzero length
    /// and every entry must be finite.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidMatrix { reason: "matrix must be nonempty".into() });
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidMatrix {
                    reason: format!("row {i} has length {}, expected {cols}", row.len()),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::InvalidMatrix {
                        reason: format!("entry ({i}, {j}) = {x} is not finite"),
                    });
                }
                data.push(x);
            }
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    /// Builds a matrix from a row-major buffer of finite values.
    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix { reason: "matrix must be nonempty".into() });
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix {
                reason: format!(
                    "buffer holds {} entries, expected {rows} x {cols}",
                    data.len()
                ),
            });
        }
        if let Some(&bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix {
                reason: format!("entry {bad} is not finite"),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// The `rows x cols` matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// The `n x n` identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// The `rows x cols` matrix of ones.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![1.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `A x` for a vector `x` of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `A x` written into a caller-provided buffer of length `rows`.
    #[inline]
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, slot) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *slot = acc;
        }
    }

    /// `A diag(w)`: column `j` scaled by `w[j]`.
    pub fn scale_columns(&self, w: &[f64]) -> Result<Matrix> {
        if w.len() != self.cols {
            return Err(Error::ShapeMismatch {
                context: "column scaling vector vs. matrix columns",
                expected: self.cols,
                found: w.len(),
            });
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * self.cols + j] *= w[j];
            }
        }
        Ok(out)
    }

    /// True when every entry is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= 0.0)
    }

    /// Errors unless every entry is `>= 0`.
    pub fn require_nonnegative(&self, context: &'static str) -> Result<()> {
        if self.is_nonnegative() {
            Ok(())
        } else {
            Err(Error::InvalidMatrix { reason: format!("{context}: entries must be nonnegative") })
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &x| m.max(crate::fmath::abs(x)))
    }
}
