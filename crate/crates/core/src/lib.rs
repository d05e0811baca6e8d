//! Log-determinants of large dense matrices by generalized matrix condensation.
//!
//! * [`matrix`]: dense row-major storage, deterministic generators, file formats.
//! * [`condense`]: serial condensation kernel with max-abs pivoting.
//! * [`baseline`]: pivoted LU log-determinant and the cofactor oracle.
//! * [`parallel`]: block-distributed condensation and cyclic Gaussian
//!   elimination on in-process workers, with exact communication counters.
//! * [`bench`]: benchmark sweeps, CSV records and speedup reports.

pub mod baseline;
pub mod bench;
pub mod condense;
pub mod logdet;
pub mod matrix;
pub mod parallel;

pub use baseline::{det_cofactor, logdet_lu};
pub use condense::{logdet_condensation, CondenseState, PivotChoice};
pub use logdet::{LogDet, Sign};
pub use matrix::{DenseMatrix, MatrixKind, MatrixSpec};
pub use parallel::{ge_parallel, mc_parallel, plan_blocks, CommStats, RunResult, WorkerPlan};
