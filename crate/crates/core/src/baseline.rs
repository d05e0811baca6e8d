//! Serial Gaussian-elimination log-determinant and the cofactor oracle.

use thiserror::Error;

use crate::logdet::{LogDet, Sign};
use crate::matrix::DenseMatrix;

/// Largest size accepted by [`det_cofactor`].
pub const COFACTOR_MAX_N: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("matrix is not square ({n_rows}x{n_cols})")]
    NotSquare { n_rows: usize, n_cols: usize },
    #[error("cofactor expansion limited to N <= {COFACTOR_MAX_N} (got {n})")]
    TooLarge { n: usize },
}

/// Log-determinant by LU with partial pivoting (max |entry| in the column,
/// lowest row position on ties).
pub fn logdet_lu(a: &DenseMatrix) -> Result<LogDet, BaselineError> {
    logdet_lu_counted(a).map(|(d, _)| d)
}

/// [`logdet_lu`] plus the number of multiply-subtract updates performed.
pub fn logdet_lu_counted(a: &DenseMatrix) -> Result<(LogDet, u64), BaselineError> {
    if !a.is_square() {
        return Err(BaselineError::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    let n = a.n_rows();
    let mut m = a.as_slice().to_vec();
    let mut log_abs = 0.0;
    let mut negative = false;
    let mut updates = 0u64;

    for k in 0..n {
        let mut p = k;
        let mut best = m[k * n + k].abs();
        for i in k + 1..n {
            let v = m[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Ok((LogDet::SINGULAR, updates));
        }
        if p != k {
            let (head, tail) = m.split_at_mut(p * n);
            head[k * n..(k + 1) * n].swap_with_slice(&mut tail[..n]);
            negative = !negative;
        }
        let (head, tail) = m.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..];
        let pivot = pivot_row[k];
        log_abs += pivot.abs().ln();
        negative ^= pivot < 0.0;
        for row in tail.chunks_exact_mut(n) {
            eliminate(row, pivot_row, k);
        }
        updates += ((n - 1 - k) * (n - 1 - k)) as u64;
    }
    Ok((LogDet::new(Sign::from_parity(negative), log_abs), updates))
}

/// `row[c] -= (row[k] / pivot_row[k]) * pivot_row[c]` for `c > k`.
#[inline]
pub(crate) fn eliminate(row: &mut [f64], pivot_row: &[f64], k: usize) {
    let factor = row[k] / pivot_row[k];
    for (x, &p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
        *x -= factor * p;
    }
}

/// Determinant by recursive Laplace expansion along the first row.
/// Factorial cost; ground truth for tiny matrices only.
pub fn det_cofactor(a: &DenseMatrix) -> Result<f64, BaselineError> {
    if !a.is_square() {
        return Err(BaselineError::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    let n = a.n_rows();
    if n > COFACTOR_MAX_N {
        return Err(BaselineError::TooLarge { n });
    }
    Ok(expand(a, 0, (1u32 << n) - 1))
}

// det of the submatrix with rows depth.. and the columns set in `cols`
fn expand(a: &DenseMatrix, depth: usize, cols: u32) -> f64 {
    if cols == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    let mut negative = false;
    for j in 0..a.n_cols() {
        if cols & (1 << j) == 0 {
            continue;
        }
        let v = a.get(depth, j);
        if v != 0.0 {
            let term = v * expand(a, depth + 1, cols & !(1 << j));
            total += if negative { -term } else { term };
        }
        negative = !negative;
    }
    total
}
