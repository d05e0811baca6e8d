//! Serial matrix condensation with max-absolute-value pivoting.
//!
//! One condensation step picks a pivot `a[k,l]`, moves column `l` into the
//! last active column, and replaces every other active row `r` by
//!
//! ```text
//! row_r[c] <- row_r[c] - (a[r,l] / a[k,l]) * row_k[c]      for c < n_col - 1
//! ```
//!
//! after which row `k` and the last column drop out of the active square.
//! The determinant changes by `a[k,l] * (-1)^(k_pos + n_col) * swap_parity`,
//! where `k_pos` is the 1-based position of row `k` among the active rows.
//! The same row update is used verbatim by every parallel worker.

use thiserror::Error;

use crate::logdet::{LogDet, Sign};
use crate::matrix::{DenseMatrix, MatrixError};

#[derive(Debug, Error, PartialEq)]
pub enum CondenseError {
    #[error("matrix is not square ({n_rows}x{n_cols})")]
    NotSquare { n_rows: usize, n_cols: usize },
    #[error("row {row} is not an active row")]
    InactiveRow { row: usize },
    #[error("column {col} is outside the {n_col} active columns")]
    InactiveColumn { col: usize, n_col: usize },
    #[error("active submatrix is {n}x{n}; a condensation step needs at least 2x2")]
    TooSmall { n: usize },
    #[error("row {row} has no nonzero active entry (determinant is 0)")]
    SingularRow { row: usize },
    #[error("pivot a[{row},{col}] is zero")]
    ZeroPivot { row: usize, col: usize },
    #[error("reference condensation needs N > 2 (got N = {n})")]
    ReferenceTooSmall { n: usize },
    #[error("condensed entry ({row}, {col}) overflowed")]
    Overflow { row: usize, col: usize },
}

/// Pivot location within the current layout: `row` is an original row index,
/// `col` a physical column position among the active columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PivotChoice {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Position and value of the largest-magnitude entry, lowest index on ties.
/// `None` when every entry is exactly zero.
pub fn max_abs_entry(row: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in row.iter().enumerate() {
        if v != 0.0 && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
            best = Some((j, v));
        }
    }
    best
}

/// Column exchange plus the rank-one update of one non-pivot row.
///
/// `row` holds the `n_col` active entries of the row; `pivot_row` holds the
/// pivot row's active entries with the pivot already moved to the last slot.
/// Afterwards `row[..n_col - 1]` is the row of the condensed matrix.
#[inline]
pub(crate) fn update_row(row: &mut [f64], pivot_row: &[f64], pivot_col: usize) {
    let last = pivot_row.len() - 1;
    debug_assert_eq!(row.len(), pivot_row.len());
    row.swap(pivot_col, last);
    let factor = row[last] / pivot_row[last];
    for (x, &p) in row[..last].iter_mut().zip(&pivot_row[..last]) {
        *x -= factor * p;
    }
}

/// Sign contribution of one step: sign(pivot) * (-1)^(k_pos + n_col) * swap parity.
/// `k_pos` is 1-based. Returns `true` when the contribution is negative.
#[inline]
pub(crate) fn step_is_negative(pivot: f64, k_pos: usize, n_col: usize, swapped: bool) -> bool {
    (pivot < 0.0) ^ ((k_pos + n_col) % 2 == 1) ^ swapped
}

/// In-place condensation of a square matrix.
#[derive(Clone, Debug)]
pub struct CondenseState {
    mat: DenseMatrix,
    n_col_active: usize,
    active_rows: Vec<usize>,
    log_acc: f64,
    negative: bool,
    scalar_updates: u64,
    pivot_row: Vec<f64>,
}

impl CondenseState {
    pub fn new(mat: DenseMatrix) -> Result<Self, CondenseError> {
        if !mat.is_square() {
            return Err(CondenseError::NotSquare {
                n_rows: mat.n_rows(),
                n_cols: mat.n_cols(),
            });
        }
        let n = mat.n_rows();
        Ok(Self {
            mat,
            n_col_active: n,
            active_rows: (0..n).collect(),
            log_acc: 0.0,
            negative: false,
            scalar_updates: 0,
            pivot_row: Vec::with_capacity(n),
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.mat
    }

    pub fn n_col_active(&self) -> usize {
        self.n_col_active
    }

    pub fn active_rows(&self) -> &[usize] {
        &self.active_rows
    }

    /// Running sum of `ln|pivot|` over the steps taken so far.
    pub fn log_acc(&self) -> f64 {
        self.log_acc
    }

    pub fn sign_acc(&self) -> Sign {
        Sign::from_parity(self.negative)
    }

    /// Multiply-subtract operations performed so far.
    pub fn scalar_updates(&self) -> u64 {
        self.scalar_updates
    }

    /// The live square: active rows in order, first `n_col_active` columns.
    pub fn active_submatrix(&self) -> Result<DenseMatrix, MatrixError> {
        let n = self.n_col_active;
        let data = self
            .active_rows
            .iter()
            .flat_map(|&r| self.mat.row(r)[..n].iter().copied())
            .collect();
        DenseMatrix::new(n, n, data)
    }

    fn position(&self, row: usize) -> Result<usize, CondenseError> {
        self.active_rows
            .iter()
            .position(|&r| r == row)
            .ok_or(CondenseError::InactiveRow { row })
    }

    /// Largest-magnitude entry of `pivot_row` among the active columns.
    pub fn select_pivot(&self, pivot_row: usize) -> Result<PivotChoice, CondenseError> {
        self.position(pivot_row)?;
        let row = &self.mat.row(pivot_row)[..self.n_col_active];
        max_abs_entry(row)
            .map(|(col, value)| PivotChoice {
                row: pivot_row,
                col,
                value,
            })
            .ok_or(CondenseError::SingularRow { row: pivot_row })
    }

    /// One condensation step on `pivot_row` with the max-abs pivot column.
    pub fn condense_step(&mut self, pivot_row: usize) -> Result<PivotChoice, CondenseError> {
        let choice = self.select_pivot(pivot_row)?;
        self.condense_step_at(pivot_row, choice.col)
    }

    /// One condensation step with an explicitly chosen pivot column.
    pub fn condense_step_at(
        &mut self,
        pivot_row: usize,
        pivot_col: usize,
    ) -> Result<PivotChoice, CondenseError> {
        let n_col = self.n_col_active;
        if n_col < 2 {
            return Err(CondenseError::TooSmall { n: n_col });
        }
        let k_idx = self.position(pivot_row)?;
        if pivot_col >= n_col {
            return Err(CondenseError::InactiveColumn {
                col: pivot_col,
                n_col,
            });
        }
        let pivot = self.mat.get(pivot_row, pivot_col);
        if pivot == 0.0 {
            return Err(CondenseError::ZeroPivot {
                row: pivot_row,
                col: pivot_col,
            });
        }

        let last = n_col - 1;
        let stride = self.mat.n_cols();
        let data = self.mat.data_mut();

        let prow = &mut data[pivot_row * stride..pivot_row * stride + n_col];
        prow.swap(pivot_col, last);
        self.pivot_row.clear();
        self.pivot_row.extend_from_slice(prow);

        for (idx, &r) in self.active_rows.iter().enumerate() {
            if idx == k_idx {
                continue;
            }
            update_row(
                &mut data[r * stride..r * stride + n_col],
                &self.pivot_row,
                pivot_col,
            );
        }
        self.scalar_updates += ((self.active_rows.len() - 1) * last) as u64;

        self.log_acc += pivot.abs().ln();
        self.negative ^= step_is_negative(pivot, k_idx + 1, n_col, pivot_col != last);
        self.active_rows.remove(k_idx);
        self.n_col_active -= 1;

        Ok(PivotChoice {
            row: pivot_row,
            col: pivot_col,
            value: pivot,
        })
    }

    /// Condenses the remaining rows top to bottom and folds in the final 1x1.
    pub fn finish(mut self) -> LogDet {
        while self.n_col_active > 1 {
            let row = self.active_rows[0];
            if self.condense_step(row).is_err() {
                return LogDet::SINGULAR;
            }
        }
        let last = self.mat.get(self.active_rows[0], 0);
        if last == 0.0 {
            return LogDet::SINGULAR;
        }
        self.log_acc += last.abs().ln();
        self.negative ^= last < 0.0;
        LogDet::new(Sign::from_parity(self.negative), self.log_acc)
    }
}

/// Log-determinant by repeated condensation, pivot rows taken top to bottom.
pub fn logdet_condensation(a: &DenseMatrix) -> Result<LogDet, CondenseError> {
    Ok(CondenseState::new(a.clone())?.finish())
}

/// Which line the pivot is divided out of when forming `A*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotAxis {
    Row,
    Column,
}

/// Copy of `a` with `a[k,l]` factored out of row `k` or column `l`,
/// so that `det(a) = a[k,l] * det(result)`.
pub fn factor_pivot(
    a: &DenseMatrix,
    k: usize,
    l: usize,
    axis: PivotAxis,
) -> Result<DenseMatrix, CondenseError> {
    check_index(a, k, l)?;
    let pivot = a.get(k, l);
    if pivot == 0.0 {
        return Err(CondenseError::ZeroPivot { row: k, col: l });
    }
    let mut out = a.clone();
    let n = a.n_cols();
    let data = out.data_mut();
    match axis {
        PivotAxis::Row => data[k * n..(k + 1) * n]
            .iter_mut()
            .for_each(|v| *v /= pivot),
        PivotAxis::Column => (0..a.n_rows()).for_each(|i| data[i * n + l] /= pivot),
    }
    Ok(out)
}

/// One condensation built from the four 2x2-determinant quadrant formulas,
/// without any in-place layout tricks. Testing reference for the kernel.
///
/// The result `B` satisfies `det(B) = (-1)^(k+l) * a[k,l]^(N-2) * det(a)`.
pub fn condense_once_reference(
    a: &DenseMatrix,
    k: usize,
    l: usize,
) -> Result<DenseMatrix, CondenseError> {
    let n = a.n_rows();
    if !a.is_square() {
        return Err(CondenseError::NotSquare {
            n_rows: n,
            n_cols: a.n_cols(),
        });
    }
    if n <= 2 {
        return Err(CondenseError::ReferenceTooSmall { n });
    }
    check_index(a, k, l)?;
    let akl = a.get(k, l);
    if akl == 0.0 {
        return Err(CondenseError::ZeroPivot { row: k, col: l });
    }
    let det2 = |p: f64, q: f64, r: f64, s: f64| p * s - q * r;
    DenseMatrix::from_fn(n - 1, n - 1, |i, j| match (i < k, j < l) {
        (true, true) => det2(a.get(i, j), a.get(i, l), a.get(k, j), akl),
        (true, false) => det2(akl, a.get(k, j + 1), a.get(i, l), a.get(i, j + 1)),
        (false, true) => det2(akl, a.get(k, j), a.get(i + 1, l), a.get(i + 1, j)),
        (false, false) => det2(akl, a.get(k, j + 1), a.get(i + 1, l), a.get(i + 1, j + 1)),
    })
    .map_err(|e| match e {
        // products of finite entries can overflow
        MatrixError::NonFinite { row, col, .. } => CondenseError::Overflow { row, col },
        other => unreachable!("{other}"),
    })
}

fn check_index(a: &DenseMatrix, k: usize, l: usize) -> Result<(), CondenseError> {
    if k >= a.n_rows() {
        return Err(CondenseError::InactiveRow { row: k });
    }
    if l >= a.n_cols() {
        return Err(CondenseError::InactiveColumn {
            col: l,
            n_col: a.n_cols(),
        });
    }
    Ok(())
}
