use mcnd::baseline::logdet_lu_counted;
use mcnd::matrix::generate;
use mcnd::{
    ge_parallel, logdet_condensation, logdet_lu, mc_parallel, plan_blocks, MatrixKind, MatrixSpec,
};

const WORKERS: [usize; 4] = [1, 2, 4, 8];

fn gen(kind: MatrixKind, n: usize, seed: u64) -> mcnd::DenseMatrix {
    generate(&MatrixSpec::new(n, kind, seed)).unwrap()
}

#[test]
fn worker_counts_agree_for_every_kind() {
    for kind in MatrixKind::ALL {
        for n in [8, 13, 33, 64] {
            let a = gen(kind, n, n as u64);
            let results: Vec<_> = WORKERS
                .iter()
                .map(|&p| mc_parallel(&a, p).unwrap().logdet)
                .collect();
            for (i, x) in results.iter().enumerate() {
                for y in &results[i + 1..] {
                    assert!(x.agrees_with(y, 10), "{kind} n={n}: {x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn broadcast_count_and_payload_lengths() {
    for n in [9, 16, 31] {
        let a = gen(MatrixKind::UniformRandom, n, 3);
        for p in 1..=8 {
            let s = mc_parallel(&a, p).unwrap().stats;
            assert_eq!(s.broadcasts, (n - p) as u64, "n={n} p={p}");
            assert_eq!(s.pivot_search_msgs, 0);
            let want: Vec<usize> = (p + 1..=n).rev().collect();
            assert_eq!(s.broadcast_lengths, want, "n={n} p={p}");
            let bytes: u64 = want.iter().map(|&len| 8 * len as u64 + 8).sum();
            assert_eq!(s.broadcast_bytes, bytes);
        }
    }
}

#[test]
fn pivot_communication_gap() {
    for n in [8, 20, 40] {
        let a = gen(MatrixKind::ScaledCorrelation, n, 5);
        for p in [2, 3, 4, 8] {
            let mc = mc_parallel(&a, p).unwrap().stats;
            let ge = ge_parallel(&a, p).unwrap().stats;
            assert_eq!(mc.pivot_search_msgs, 0);
            assert!(ge.pivot_search_msgs >= (n - p) as u64, "n={n} p={p}");
        }
    }
}

#[test]
fn block_distribution_is_load_balanced() {
    for n in [10, 17, 64, 100] {
        let a = gen(MatrixKind::DiagonallyDominant, n, 1);
        for p in [2, 3, 4, 7, 8] {
            let s = mc_parallel(&a, p).unwrap().stats;
            let max = *s.worker_row_updates.iter().max().unwrap();
            let min = *s.worker_row_updates.iter().min().unwrap();
            assert!(
                max - min <= n as u64,
                "n={n} p={p}: {:?}",
                s.worker_row_updates
            );
        }
    }
}

#[test]
fn update_count_matches_serial_elimination() {
    for n in [5, 12, 40] {
        let a = gen(MatrixKind::UniformRandom, n, 8);
        let (_, serial) = logdet_lu_counted(&a).unwrap();
        assert_eq!(serial, (0..n as u64).map(|m| m * m).sum::<u64>());
        for p in 1..=n.min(8) {
            let s = mc_parallel(&a, p).unwrap().stats;
            assert_eq!(
                s.scalar_updates + s.remainder_updates,
                serial,
                "n={n} p={p}"
            );
        }
    }
}

#[test]
fn ge_parallel_tracks_lu_for_every_p() {
    for kind in MatrixKind::ALL {
        let a = gen(kind, 21, 2);
        let lu = logdet_lu(&a).unwrap();
        assert!(ge_parallel(&a, 1).unwrap().logdet.bitwise_eq(&lu), "{kind}");
        // same pivots and updates; only the order of the log sum differs
        for p in 2..=8 {
            let ge = ge_parallel(&a, p).unwrap().logdet;
            assert!(ge.agrees_with(&lu, 13), "{kind} p={p}: {ge} vs {lu}");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let a = gen(MatrixKind::UniformRandom, 37, 12);
    for p in [2, 5] {
        let x = mc_parallel(&a, p).unwrap();
        let y = mc_parallel(&a, p).unwrap();
        assert!(x.logdet.bitwise_eq(&y.logdet));
        assert_eq!(x.stats.broadcast_lengths, y.stats.broadcast_lengths);
        assert_eq!(x.stats.worker_row_updates, y.stats.worker_row_updates);
    }
}

#[test]
fn timings_are_consistent() {
    let a = gen(MatrixKind::UniformRandom, 64, 1);
    for r in [mc_parallel(&a, 4).unwrap(), ge_parallel(&a, 4).unwrap()] {
        let s = r.stats;
        assert!(s.scatter_seconds >= 0.0);
        assert!(s.total_seconds >= s.comm_seconds && s.comm_seconds >= 0.0);
        assert!((s.compute_seconds + s.comm_seconds - s.total_seconds).abs() < 1e-12);
    }
}

#[test]
fn plan_covers_rows_in_order() {
    for n in 1..40 {
        for p in 1..=n.min(9) {
            let plan = plan_blocks(n, p).unwrap();
            let lens = plan.lengths();
            assert_eq!(lens.iter().sum::<usize>(), n);
            assert!(lens.iter().max().unwrap() - lens.iter().min().unwrap() <= 1);
            let mut next = 0;
            for b in plan.blocks() {
                assert_eq!(b.start, next);
                next += b.len;
            }
            for row in 0..n {
                let w = plan.owner_of(row).unwrap();
                let b = &plan.blocks()[w];
                assert!(b.start <= row && row < b.start + b.len);
            }
        }
    }
}

#[test]
fn serial_condensation_is_the_single_worker_run() {
    let a = gen(MatrixKind::ScaledCorrelation, 50, 4);
    let s = logdet_condensation(&a).unwrap();
    assert!(mc_parallel(&a, 1).unwrap().logdet.bitwise_eq(&s));
}
