use std::time::Instant;

use super::comm::{Broadcast, Candidate, Endpoint};
use super::{check_input, run_workers, CommStats, ParallelError, RunResult, WorkerReport};
use crate::baseline::eliminate;
use crate::logdet::{LogDet, Sign};
use crate::matrix::DenseMatrix;

const MASTER: usize = 0;

/// Rows dealt cyclically: row `i` goes to worker `i mod p`.
struct CyclicBlock {
    rows: Vec<f64>,
    global: Vec<usize>,
}

enum GeOutput {
    Singular,
    Done(Option<Vec<f64>>),
}

/// Parallel Gaussian elimination with partial pivoting over `p` cyclically
/// distributed workers.
///
/// Rows are never moved between workers; instead every worker mirrors the
/// row order a serial pivoted LU would have, so pivots and row updates are
/// identical to [`logdet_lu`](crate::baseline::logdet_lu) for every `p`.
/// Only the summation order of the per-worker logs differs; `p == 1` is
/// bit-identical. Each column costs one global pivot search.
pub fn ge_parallel(a: &DenseMatrix, p: usize) -> Result<RunResult, ParallelError> {
    let n = check_input(a, p)?;

    let start = Instant::now();
    let blocks: Vec<CyclicBlock> = (0..p)
        .map(|w| {
            let global: Vec<usize> = (w..n).step_by(p).collect();
            let mut rows = Vec::with_capacity(global.len() * n);
            for &g in &global {
                rows.extend_from_slice(a.row(g));
            }
            CyclicBlock { rows, global }
        })
        .collect();
    let scatter = start.elapsed();

    let started = Instant::now();
    let reports = run_workers(blocks, |ep, block| ge_worker(ep, block, n))?;

    let mut stats = CommStats::default();
    for r in &reports {
        stats.absorb(&r.comm);
        stats.worker_row_updates.push(r.row_updates);
        stats.scalar_updates += r.scalar_updates;
    }
    stats.broadcast_lengths = reports[MASTER].comm.broadcast_lengths.clone();

    let logdet = match &reports[MASTER].output {
        GeOutput::Singular => LogDet::SINGULAR,
        GeOutput::Done(None) => unreachable!("master always receives the reduction"),
        GeOutput::Done(Some(reduced)) => {
            let negative = (reduced[1] as u64) % 2 == 1;
            LogDet::new(Sign::from_parity(negative), reduced[0])
        }
    };
    stats.set_times(scatter, started.elapsed(), reports[MASTER].comm.comm_time);

    Ok(RunResult {
        logdet,
        stats,
        n_workers: p,
    })
}

fn ge_worker(
    mut ep: Endpoint,
    mut block: CyclicBlock,
    n: usize,
) -> Result<WorkerReport<GeOutput>, ParallelError> {
    let rank = ep.rank();
    let p = ep.size();
    let local = block.global.len();
    let mut alive = vec![true; local];

    // Serial-LU row order, replicated on every worker.
    let mut pos_of: Vec<usize> = (0..n).collect();
    let mut row_at: Vec<usize> = (0..n).collect();

    let mut log_acc = 0.0;
    let mut negative = false;
    let mut row_updates = 0u64;
    let mut scalar_updates = 0u64;

    for k in 0..n {
        let mut best: Option<Candidate> = None;
        for (li, &g) in block.global.iter().enumerate() {
            if !alive[li] {
                continue;
            }
            let c = Candidate {
                abs: block.rows[li * n + k].abs(),
                pos: pos_of[g],
            };
            if best.is_none_or(|b| c.beats(&b)) {
                best = Some(c);
            }
        }
        let decision = ep.pivot_search(MASTER, best)?;
        let Some(decision) = decision.filter(|d| d.abs > 0.0) else {
            // the decision itself is the abort token
            return Ok(WorkerReport {
                output: GeOutput::Singular,
                row_updates,
                scalar_updates,
                comm: ep.into_stats(),
            });
        };

        let g = row_at[decision.pos];
        if decision.pos != k {
            let displaced = row_at[k];
            row_at.swap(k, decision.pos);
            pos_of[g] = k;
            pos_of[displaced] = decision.pos;
            if rank == MASTER {
                negative = !negative;
            }
        }

        let owner = g % p;
        let mut payload = None;
        if owner == rank {
            let li = g / p;
            alive[li] = false;
            let pivot = block.rows[li * n + k];
            log_acc += pivot.abs().ln();
            negative ^= pivot < 0.0;
            if k + 1 < n {
                payload = Some(Broadcast::Row {
                    col: g,
                    values: block.rows[li * n + k..(li + 1) * n].to_vec(),
                });
            }
        }
        if k + 1 == n {
            break;
        }
        let pivot_row = match ep.broadcast(owner, payload)? {
            Broadcast::Row { values, .. } => values,
            Broadcast::Abort => {
                return Err(ParallelError::Protocol {
                    rank,
                    detail: "unexpected abort token".into(),
                })
            }
        };
        for li in (0..local).filter(|&li| alive[li]) {
            eliminate(&mut block.rows[li * n + k..(li + 1) * n], &pivot_row, 0);
            row_updates += 1;
            scalar_updates += (n - 1 - k) as u64;
        }
    }

    let reduced = ep.reduce_sum(MASTER, vec![log_acc, f64::from(u8::from(negative))])?;
    Ok(WorkerReport {
        output: GeOutput::Done(reduced),
        row_updates,
        scalar_updates,
        comm: ep.into_stats(),
    })
}
