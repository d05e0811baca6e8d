use std::time::Instant;

use super::comm::{Broadcast, Endpoint};
use super::ParallelError;
use super::{check_input, plan_blocks, run_workers, CommStats, RunResult, WorkerReport};
use crate::baseline::logdet_lu_counted;
use crate::condense::{max_abs_entry, step_is_negative, update_row};
use crate::logdet::{LogDet, Sign};
use crate::matrix::DenseMatrix;

const MASTER: usize = 0;

enum McOutput {
    Singular,
    /// Only the master receives the remainder rows and reduced accumulators.
    Done(Option<(Vec<Vec<f64>>, Vec<f64>)>),
}

/// Parallel matrix condensation over `p` block-distributed workers.
///
/// Workers take pivot turns round-robin; a worker with `len` rows takes
/// `len - 1` turns, so after `N - p` steps each holds one row of the live
/// `p x p` square. Those rows are gathered on the master, which finishes
/// with LU. With `p == 1` the result is bit-identical to
/// [`logdet_condensation`](crate::condense::logdet_condensation).
pub fn mc_parallel(a: &DenseMatrix, p: usize) -> Result<RunResult, ParallelError> {
    let n = check_input(a, p)?;
    let plan = plan_blocks(n, p)?;
    let lens = plan.lengths();

    let start = Instant::now();
    let blocks: Vec<Vec<f64>> = plan
        .blocks()
        .iter()
        .map(|b| a.as_slice()[b.start * n..(b.start + b.len) * n].to_vec())
        .collect();
    let scatter = start.elapsed();

    let started = Instant::now();
    let reports = run_workers(blocks, |ep, block| mc_worker(ep, block, &lens, n))?;

    let mut stats = CommStats::default();
    for r in &reports {
        stats.absorb(&r.comm);
        stats.worker_row_updates.push(r.row_updates);
        stats.scalar_updates += r.scalar_updates;
    }
    stats.broadcast_lengths = reports[MASTER].comm.broadcast_lengths.clone();

    let logdet = match &reports[MASTER].output {
        McOutput::Singular => LogDet::SINGULAR,
        McOutput::Done(None) => unreachable!("master always receives the remainder"),
        McOutput::Done(Some((rows, reduced))) => {
            let data = rows.iter().flatten().copied().collect();
            let remainder = DenseMatrix::new(p, p, data).map_err(|e| ParallelError::Protocol {
                rank: MASTER,
                detail: format!("gathered remainder: {e}"),
            })?;
            let (rest, updates) = logdet_lu_counted(&remainder).expect("remainder is square");
            stats.remainder_updates = updates;
            if rest.is_singular() {
                LogDet::SINGULAR
            } else {
                let negative = (reduced[1] as u64) % 2 == 1;
                LogDet::new(
                    Sign::from_parity(negative) * rest.sign,
                    reduced[0] + rest.log_abs,
                )
            }
        }
    };
    stats.set_times(scatter, started.elapsed(), reports[MASTER].comm.comm_time);

    Ok(RunResult {
        logdet,
        stats,
        n_workers: p,
    })
}

fn mc_worker(
    mut ep: Endpoint,
    mut block: Vec<f64>,
    lens: &[usize],
    n: usize,
) -> Result<WorkerReport<McOutput>, ParallelError> {
    let rank = ep.rank();
    let p = lens.len();
    let len = lens[rank];
    let rounds = lens.iter().max().copied().unwrap_or(1) - 1;

    let mut remaining = lens.to_vec();
    let mut cursor = 0;
    let mut n_col = n;
    let mut log_acc = 0.0;
    let mut negative = false;
    let mut row_updates = 0u64;
    let mut scalar_updates = 0u64;

    for round in 0..rounds {
        for owner in 0..p {
            if round + 1 >= lens[owner] {
                continue;
            }
            let payload = (owner == rank).then(|| {
                let row = &mut block[cursor * n..cursor * n + n_col];
                match max_abs_entry(row) {
                    None => Broadcast::Abort,
                    Some((col, pivot)) => {
                        let last = n_col - 1;
                        row.swap(col, last);
                        let k_pos = remaining[..owner].iter().sum::<usize>() + 1;
                        log_acc += pivot.abs().ln();
                        negative ^= step_is_negative(pivot, k_pos, n_col, col != last);
                        cursor += 1;
                        Broadcast::Row {
                            col,
                            values: row.to_vec(),
                        }
                    }
                }
            });
            let (col, pivot_row) = match ep.broadcast(owner, payload)? {
                Broadcast::Abort => {
                    return Ok(WorkerReport {
                        output: McOutput::Singular,
                        row_updates,
                        scalar_updates,
                        comm: ep.into_stats(),
                    })
                }
                Broadcast::Row { col, values } => (col, values),
            };
            for r in cursor..len {
                update_row(&mut block[r * n..r * n + n_col], &pivot_row, col);
            }
            let touched = (len - cursor) as u64;
            row_updates += touched;
            scalar_updates += touched * (n_col as u64 - 1);
            remaining[owner] -= 1;
            n_col -= 1;
        }
    }
    debug_assert_eq!(cursor, len - 1);
    debug_assert_eq!(n_col, p);

    let last_row = block[cursor * n..cursor * n + n_col].to_vec();
    let gathered = ep.gather(MASTER, last_row)?;
    let reduced = ep.reduce_sum(MASTER, vec![log_acc, f64::from(u8::from(negative))])?;
    Ok(WorkerReport {
        output: McOutput::Done(gathered.zip(reduced)),
        row_updates,
        scalar_updates,
        comm: ep.into_stats(),
    })
}
