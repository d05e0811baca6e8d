//! Distributed-memory log-determinant algorithms on in-process workers.
//!
//! Each run spawns `p` shared-nothing workers (rank 0 is the master and runs
//! on the calling thread). Workers own their rows exclusively and talk only
//! through the counted collectives in [`comm`], so message counts and byte
//! totals are exact and deterministic for a given `(matrix, p)`.
//!
//! * [`mc_parallel`]: block row distribution, round-robin pivot ownership,
//!   pivots chosen inside the owner's row. No pivot-search traffic.
//! * [`ge_parallel`]: cyclic row distribution and partial pivoting, which
//!   needs a global arg-max across workers for every column.

pub mod comm;
mod ge;
mod mc;

pub use ge::ge_parallel;
pub use mc::mc_parallel;

use std::thread;
use std::time::Duration;

use thiserror::Error;

use crate::logdet::LogDet;
use crate::matrix::DenseMatrix;
use comm::{Endpoint, EndpointStats};

#[derive(Debug, Error)]
pub enum ParallelError {
    #[error("invalid plan: {p} workers for {n} rows (need 1 <= p <= n)")]
    InvalidPlan { n: usize, p: usize },
    #[error("matrix is not square ({n_rows}x{n_cols})")]
    NotSquare { n_rows: usize, n_cols: usize },
    #[error("worker {rank} dropped out; run aborted")]
    WorkerDropped { rank: usize },
    #[error("worker {rank} panicked; run aborted")]
    WorkerPanicked { rank: usize },
    #[error("protocol violation on worker {rank}: {detail}")]
    Protocol { rank: usize, detail: String },
}

/// Contiguous row range owned by one worker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowBlock {
    pub start: usize,
    pub len: usize,
}

/// Block row distribution of `n` rows over `p` workers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkerPlan {
    n: usize,
    blocks: Vec<RowBlock>,
}

impl WorkerPlan {
    pub fn n_workers(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[RowBlock] {
        &self.blocks
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len).collect()
    }

    pub fn owner_of(&self, row: usize) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| (b.start..b.start + b.len).contains(&row))
    }
}

/// Near-equal contiguous blocks: the first `n mod p` workers get one extra row.
pub fn plan_blocks(n: usize, p: usize) -> Result<WorkerPlan, ParallelError> {
    if p == 0 || p > n {
        return Err(ParallelError::InvalidPlan { n, p });
    }
    let (base, extra) = (n / p, n % p);
    let mut start = 0;
    let blocks = (0..p)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let block = RowBlock { start, len };
            start += len;
            block
        })
        .collect();
    Ok(WorkerPlan { n, blocks })
}

/// Communication and work accounting for one run.
#[derive(Clone, Debug, Default)]
pub struct CommStats {
    /// Pivot-row broadcasts (including an abort token, if any).
    pub broadcasts: u64,
    pub broadcast_bytes: u64,
    pub gathers: u64,
    pub gather_bytes: u64,
    pub reductions: u64,
    pub reduce_bytes: u64,
    /// Messages whose only purpose is locating or agreeing on a pivot.
    pub pivot_search_msgs: u64,
    pub pivot_search_bytes: u64,
    /// Entries per broadcast pivot row, in order.
    pub broadcast_lengths: Vec<usize>,
    /// Row updates performed by each worker.
    pub worker_row_updates: Vec<u64>,
    /// Multiply-subtract updates across all workers.
    pub scalar_updates: u64,
    /// Multiply-subtract updates of the master's final elimination.
    pub remainder_updates: u64,
    /// Building and handing out the row blocks.
    pub scatter_seconds: f64,
    /// Master time inside collectives.
    pub comm_seconds: f64,
    pub compute_seconds: f64,
    /// From the end of the scatter to the final result.
    pub total_seconds: f64,
}

impl CommStats {
    fn absorb(&mut self, ep: &EndpointStats) {
        self.broadcasts += ep.broadcasts;
        self.broadcast_bytes += ep.broadcast_bytes;
        self.gathers += ep.gathers;
        self.gather_bytes += ep.gather_bytes;
        self.reductions += ep.reductions;
        self.reduce_bytes += ep.reduce_bytes;
        self.pivot_search_msgs += ep.pivot_search_msgs;
        self.pivot_search_bytes += ep.pivot_search_bytes;
    }

    fn set_times(&mut self, scatter: Duration, total: Duration, master_comm: Duration) {
        self.scatter_seconds = scatter.as_secs_f64();
        self.total_seconds = total.as_secs_f64();
        self.comm_seconds = master_comm.as_secs_f64().min(self.total_seconds);
        self.compute_seconds = self.total_seconds - self.comm_seconds;
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub logdet: LogDet,
    pub stats: CommStats,
    pub n_workers: usize,
}

/// What one worker hands back after the run.
struct WorkerReport<T> {
    output: T,
    row_updates: u64,
    scalar_updates: u64,
    comm: EndpointStats,
}

/// Runs `worker` on `p` workers, rank 0 on the calling thread. Any failure
/// aborts the whole run; a panic is reported in preference to the dropouts
/// it causes on the peers.
fn run_workers<B, T, F>(blocks: Vec<B>, worker: F) -> Result<Vec<WorkerReport<T>>, ParallelError>
where
    B: Send,
    T: Send,
    F: Fn(Endpoint, B) -> Result<WorkerReport<T>, ParallelError> + Sync,
{
    let p = blocks.len();
    let worker = &worker;
    let results: Vec<Result<WorkerReport<T>, ParallelError>> = thread::scope(|s| {
        let mut endpoints = comm::group(p).into_iter();
        let mut blocks = blocks.into_iter();
        let master = (endpoints.next().unwrap(), blocks.next().unwrap());
        let handles: Vec<_> = endpoints
            .zip(blocks)
            .map(|(ep, block)| s.spawn(move || worker(ep, block)))
            .collect();
        let mut results = vec![worker(master.0, master.1)];
        for (i, h) in handles.into_iter().enumerate() {
            results.push(
                h.join()
                    .unwrap_or(Err(ParallelError::WorkerPanicked { rank: i + 1 })),
            );
        }
        results
    });

    let mut first_err = None;
    let mut reports = Vec::with_capacity(p);
    for r in results {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => {
                // a panic explains the dropouts it causes
                let replace = matches!(
                    (&first_err, &e),
                    (None, _)
                        | (
                            Some(ParallelError::WorkerDropped { .. }),
                            ParallelError::WorkerPanicked { .. }
                        )
                );
                if replace {
                    first_err = Some(e);
                }
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(reports),
    }
}

fn check_input(a: &DenseMatrix, p: usize) -> Result<usize, ParallelError> {
    if !a.is_square() {
        return Err(ParallelError::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    let n = a.n_rows();
    if p == 0 || p > n {
        return Err(ParallelError::InvalidPlan { n, p });
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_plan() {
        let plan = plan_blocks(16, 4).unwrap();
        assert_eq!(plan.lengths(), vec![4, 4, 4, 4]);
        assert_eq!(plan.blocks()[2], RowBlock { start: 8, len: 4 });
        assert_eq!(plan.owner_of(15), Some(3));
        assert_eq!(plan.owner_of(16), None);
    }

    #[test]
    fn uneven_and_degenerate_plans() {
        assert_eq!(plan_blocks(10, 4).unwrap().lengths(), vec![3, 3, 2, 2]);
        assert_eq!(plan_blocks(5, 5).unwrap().lengths(), vec![1; 5]);
        assert!(matches!(
            plan_blocks(4, 5),
            Err(ParallelError::InvalidPlan { n: 4, p: 5 })
        ));
        assert!(matches!(
            plan_blocks(4, 0),
            Err(ParallelError::InvalidPlan { .. })
        ));
    }

    #[test]
    fn blocks_partition_rows() {
        for n in 1..40 {
            for p in 1..=n {
                let plan = plan_blocks(n, p).unwrap();
                let mut next = 0;
                for b in plan.blocks() {
                    assert_eq!(b.start, next);
                    next += b.len;
                }
                assert_eq!(next, n);
                let lens = plan.lengths();
                let (lo, hi) = (lens.iter().min().unwrap(), lens.iter().max().unwrap());
                assert!(hi - lo <= 1);
            }
        }
    }

    #[test]
    fn panicking_worker_aborts_run() {
        let r = run_workers(vec![(); 3], |ep, ()| {
            if ep.rank() == 2 {
                panic!("injected fault");
            }
            let mut ep = ep;
            ep.gather(0, vec![1.0])?;
            Ok(WorkerReport {
                output: (),
                row_updates: 0,
                scalar_updates: 0,
                comm: ep.into_stats(),
            })
        });
        assert!(matches!(r, Err(ParallelError::WorkerPanicked { rank: 2 })));
    }
}
