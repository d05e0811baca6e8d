//! Speedup and communication summaries over benchmark records.
//!
//! Speedup for `(algorithm, n, p)` is `T_s / T_p`: `T_p` is that
//! algorithm's mean total time at `(n, p)`, and `T_s` is the fastest mean
//! time at `p = 1` over all algorithms at size `n`.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use super::{Algorithm, BenchRecord};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("no records")]
    Empty,
    #[error("no single-worker timing for n={n}; cannot form T_s")]
    NoSerialBaseline { n: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub p: usize,
    pub runs: usize,
    pub mean_total_s: f64,
    pub speedup: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AverageSpeedupRow {
    pub algorithm: Algorithm,
    pub p: usize,
    pub sizes: usize,
    pub mean_speedup: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommRow {
    pub algorithm: Algorithm,
    pub p: usize,
    pub mean_scatter_s: f64,
    pub mean_comm_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    /// Per size: the algorithm and mean time defining `T_s`.
    pub serial_baseline: BTreeMap<usize, (Algorithm, f64)>,
    pub speedups: Vec<SpeedupRow>,
    pub averages: Vec<AverageSpeedupRow>,
    pub comm: Vec<CommRow>,
}

#[derive(Default)]
struct Acc {
    runs: usize,
    total: f64,
    scatter: f64,
    comm: f64,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

pub fn build_report(records: &[BenchRecord]) -> Result<Report, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut cells: BTreeMap<(Algorithm, usize, usize), Acc> = BTreeMap::new();
    for r in records {
        let acc = cells.entry((r.algorithm, r.n, r.p)).or_default();
        acc.runs += 1;
        acc.total += r.total_seconds;
        acc.scatter += r.scatter_seconds;
        acc.comm += r.comm_seconds;
    }

    let mut serial_baseline: BTreeMap<usize, (Algorithm, f64)> = BTreeMap::new();
    for (&(alg, n, p), acc) in &cells {
        if p != 1 {
            continue;
        }
        let t = acc.total / acc.runs as f64;
        let slot = serial_baseline.entry(n).or_insert((alg, t));
        if t < slot.1 {
            *slot = (alg, t);
        }
    }

    let mut speedups = Vec::with_capacity(cells.len());
    for (&(algorithm, n, p), acc) in &cells {
        let &(_, t_s) = serial_baseline
            .get(&n)
            .ok_or(ReportError::NoSerialBaseline { n })?;
        let mean_total_s = acc.total / acc.runs as f64;
        speedups.push(SpeedupRow {
            algorithm,
            n,
            p,
            runs: acc.runs,
            mean_total_s,
            speedup: t_s / mean_total_s,
        });
    }

    let mut by_alg_p: BTreeMap<(Algorithm, usize), Vec<&SpeedupRow>> = BTreeMap::new();
    for row in &speedups {
        by_alg_p
            .entry((row.algorithm, row.p))
            .or_default()
            .push(row);
    }
    let averages = by_alg_p
        .iter()
        .map(|(&(algorithm, p), rows)| AverageSpeedupRow {
            algorithm,
            p,
            sizes: rows.len(),
            mean_speedup: mean(rows.iter().map(|r| r.speedup)),
        })
        .collect();

    let comm = by_alg_p
        .keys()
        .map(|&(algorithm, p)| {
            let per_size: Vec<&Acc> = cells
                .iter()
                .filter(|(&(a, _, q), _)| a == algorithm && q == p)
                .map(|(_, acc)| acc)
                .collect();
            CommRow {
                algorithm,
                p,
                mean_scatter_s: mean(per_size.iter().map(|a| a.scatter / a.runs as f64)),
                mean_comm_s: mean(per_size.iter().map(|a| a.comm / a.runs as f64)),
            }
        })
        .collect();

    Ok(Report {
        serial_baseline,
        speedups,
        averages,
        comm,
    })
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "== speedup by size (T_s / T_p) ==");
        let _ = writeln!(
            s,
            "{:<12} {:>7} {:>4} {:>5} {:>14} {:>10}",
            "algorithm", "n", "p", "runs", "mean_total_s", "speedup"
        );
        for r in &self.speedups {
            let _ = writeln!(
                s,
                "{:<12} {:>7} {:>4} {:>5} {:>14.6} {:>10.4}",
                r.algorithm.name(),
                r.n,
                r.p,
                r.runs,
                r.mean_total_s,
                r.speedup
            );
        }
        let _ = writeln!(s, "\nserial baseline T_s:");
        for (n, (alg, t)) in &self.serial_baseline {
            let _ = writeln!(s, "  n={n:<7} {:<12} {t:.6}", alg.name());
        }

        let _ = writeln!(s, "\n== average speedup across sizes ==");
        let _ = writeln!(
            s,
            "{:<12} {:>4} {:>6} {:>12}",
            "algorithm", "p", "sizes", "mean_speedup"
        );
        for r in &self.averages {
            let _ = writeln!(
                s,
                "{:<12} {:>4} {:>6} {:>12.4}",
                r.algorithm.name(),
                r.p,
                r.sizes,
                r.mean_speedup
            );
        }

        let _ = writeln!(
            s,
            "\n== distribution and communication time (mean across sizes) =="
        );
        let _ = writeln!(
            s,
            "{:<12} {:>4} {:>14} {:>14}",
            "algorithm", "p", "scatter_s", "comm_s"
        );
        for r in &self.comm {
            let _ = writeln!(
                s,
                "{:<12} {:>4} {:>14.6} {:>14.6}",
                r.algorithm.name(),
                r.p,
                r.mean_scatter_s,
                r.mean_comm_s
            );
        }
        s
    }

    /// Machine-readable form: one section per table, each with its own header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("table,algorithm,n,p,runs,mean_total_s,speedup\n");
        for r in &self.speedups {
            let _ = writeln!(
                s,
                "speedup,{},{},{},{},{:?},{:?}",
                r.algorithm, r.n, r.p, r.runs, r.mean_total_s, r.speedup
            );
        }
        s.push_str("\ntable,algorithm,p,sizes,mean_speedup\n");
        for r in &self.averages {
            let _ = writeln!(
                s,
                "average,{},{},{},{:?}",
                r.algorithm, r.p, r.sizes, r.mean_speedup
            );
        }
        s.push_str("\ntable,algorithm,p,mean_scatter_s,mean_comm_s\n");
        for r in &self.comm {
            let _ = writeln!(
                s,
                "comm,{},{},{:?},{:?}",
                r.algorithm, r.p, r.mean_scatter_s, r.mean_comm_s
            );
        }
        s
    }
}
