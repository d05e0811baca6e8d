//! Dense row-major matrix storage, generators and file formats.

mod generate;
mod io;

pub use generate::{generate, MatrixKind, MatrixSpec};
pub use io::{read_csv, read_matrix, write_csv, write_matrix, FORMAT_VERSION, MAGIC};

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("data length {len} does not match {n_rows}x{n_cols}")]
    DimensionMismatch {
        n_rows: usize,
        n_cols: usize,
        len: usize,
    },
    #[error("matrix dimensions must be positive (got {n_rows}x{n_cols})")]
    EmptyDimension { n_rows: usize, n_cols: usize },
    #[error("non-finite value {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("index {index} out of range for dimension {bound}")]
    OutOfBounds { index: usize, bound: usize },
    #[error("invalid size: matrix size must be at least 1")]
    InvalidSize,
    #[error("format error: {0}")]
    Format(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Row-major dense matrix of finite `f64` values.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting empty shapes and NaN/Inf.
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if n_rows == 0 || n_cols == 0 {
            return Err(MatrixError::EmptyDimension { n_rows, n_cols });
        }
        let expected = n_rows
            .checked_mul(n_cols)
            .ok_or(MatrixError::DimensionMismatch {
                n_rows,
                n_cols,
                len: data.len(),
            })?;
        if data.len() != expected {
            return Err(MatrixError::DimensionMismatch {
                n_rows,
                n_cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(MatrixError::NonFinite {
                row: pos / n_cols,
                col: pos % n_cols,
                value: data[pos],
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(MatrixError::DimensionMismatch {
                    n_rows,
                    n_cols,
                    len: data.len() + row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(n_rows, n_cols, data)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Result<Self, MatrixError> {
        Self::new(n_rows, n_cols, vec![0.0; n_rows * n_cols])
    }

    pub fn identity(n: usize) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_fn(
        n_rows: usize,
        n_cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, MatrixError> {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                data.push(f(i, j));
            }
        }
        Self::new(n_rows, n_cols, data)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    /// Stores `value` at (row, col). Non-finite values are rejected.
    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<(), MatrixError> {
        self.check_row(row)?;
        self.check_col(col)?;
        if !value.is_finite() {
            return Err(MatrixError::NonFinite { row, col, value });
        }
        self.data[row * self.n_cols + col] = value;
        Ok(())
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Mutable access to the raw row-major buffer. Callers keep values finite.
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Exchanges two columns in place. Returns the determinant parity of the
    /// exchange: `-1` for distinct columns, `+1` otherwise.
    pub fn swap_columns(&mut self, j1: usize, j2: usize) -> Result<i8, MatrixError> {
        self.check_col(j1)?;
        self.check_col(j2)?;
        if j1 == j2 {
            return Ok(1);
        }
        for row in self.data.chunks_exact_mut(self.n_cols) {
            row.swap(j1, j2);
        }
        Ok(-1)
    }

    /// Exchanges two rows in place, with the same parity convention as
    /// [`DenseMatrix::swap_columns`].
    pub fn swap_rows(&mut self, i1: usize, i2: usize) -> Result<i8, MatrixError> {
        self.check_row(i1)?;
        self.check_row(i2)?;
        if i1 == i2 {
            return Ok(1);
        }
        let (lo, hi) = (i1.min(i2), i1.max(i2));
        let n = self.n_cols;
        let (head, tail) = self.data.split_at_mut(hi * n);
        head[lo * n..(lo + 1) * n].swap_with_slice(&mut tail[..n]);
        Ok(-1)
    }

    /// Multiplies one row by a finite scalar.
    pub fn scale_row(&mut self, row: usize, factor: f64) -> Result<(), MatrixError> {
        self.check_row(row)?;
        let n = self.n_cols;
        for (col, v) in self.data[row * n..(row + 1) * n].iter_mut().enumerate() {
            let scaled = *v * factor;
            if !scaled.is_finite() {
                return Err(MatrixError::NonFinite {
                    row,
                    col,
                    value: scaled,
                });
            }
            *v = scaled;
        }
        Ok(())
    }

    /// Copy with row `skip_row` and column `skip_col` removed.
    pub fn minor(&self, skip_row: usize, skip_col: usize) -> Result<Self, MatrixError> {
        self.check_row(skip_row)?;
        self.check_col(skip_col)?;
        let data = (0..self.n_rows)
            .filter(|&i| i != skip_row)
            .flat_map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(move |&(j, _)| j != skip_col)
                    .map(|(_, &v)| v)
            })
            .collect();
        Self::new(self.n_rows - 1, self.n_cols - 1, data)
    }

    fn check_row(&self, row: usize) -> Result<(), MatrixError> {
        if row >= self.n_rows {
            return Err(MatrixError::OutOfBounds {
                index: row,
                bound: self.n_rows,
            });
        }
        Ok(())
    }

    fn check_col(&self, col: usize) -> Result<(), MatrixError> {
        if col >= self.n_cols {
            return Err(MatrixError::OutOfBounds {
                index: col,
                bound: self.n_cols,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.n_rows, self.n_cols)?;
        for i in 0..self.n_rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}
