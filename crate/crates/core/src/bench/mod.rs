//! Benchmark records, the sweep driver, and CSV I/O.
//!
//! CSV schema (exact header):
//! `algorithm,n,p,run,total_s,scatter_s,comm_s,sign,logabs`.
//! Lines starting with `#` are comments; the sweep uses them for skipped
//! combinations.

mod report;

pub use report::{build_report, AverageSpeedupRow, CommRow, Report, ReportError, SpeedupRow};

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{logdet_lu, BaselineError};
use crate::condense::{logdet_condensation, CondenseError};
use crate::logdet::{LogDet, Sign};
use crate::matrix::{generate, DenseMatrix, MatrixError, MatrixKind, MatrixSpec};
use crate::parallel::{ge_parallel, mc_parallel, CommStats, ParallelError, RunResult};

pub const CSV_HEADER: &str = "algorithm,n,p,run,total_s,scatter_s,comm_s,sign,logabs";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    McSerial,
    McParallel,
    GeSerial,
    GeParallel,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::McSerial,
        Algorithm::McParallel,
        Algorithm::GeSerial,
        Algorithm::GeParallel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::McSerial => "mc-serial",
            Algorithm::McParallel => "mc-parallel",
            Algorithm::GeSerial => "ge-serial",
            Algorithm::GeParallel => "ge-parallel",
        }
    }

    pub fn is_parallel(self) -> bool {
        matches!(self, Algorithm::McParallel | Algorithm::GeParallel)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm '{s}'"))
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Condense(#[from] CondenseError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Parallel(#[from] ParallelError),
}

/// Runs one algorithm. Serial algorithms ignore `p` and report one worker
/// with empty communication stats.
pub fn run_algorithm(alg: Algorithm, a: &DenseMatrix, p: usize) -> Result<RunResult, RunError> {
    let serial = |f: &dyn Fn() -> Result<LogDet, RunError>| -> Result<RunResult, RunError> {
        let start = Instant::now();
        let logdet = f()?;
        let elapsed = start.elapsed().as_secs_f64();
        Ok(RunResult {
            logdet,
            stats: CommStats {
                total_seconds: elapsed,
                compute_seconds: elapsed,
                worker_row_updates: vec![],
                ..CommStats::default()
            },
            n_workers: 1,
        })
    };
    match alg {
        Algorithm::McSerial => serial(&|| Ok(logdet_condensation(a)?)),
        Algorithm::GeSerial => serial(&|| Ok(logdet_lu(a)?)),
        Algorithm::McParallel => Ok(mc_parallel(a, p)?),
        Algorithm::GeParallel => Ok(ge_parallel(a, p)?),
    }
}

/// One benchmark observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub p: usize,
    pub run: usize,
    #[serde(rename = "total_s")]
    pub total_seconds: f64,
    #[serde(rename = "scatter_s")]
    pub scatter_seconds: f64,
    #[serde(rename = "comm_s")]
    pub comm_seconds: f64,
    #[serde(rename = "sign")]
    pub logdet_sign: i8,
    #[serde(rename = "logabs")]
    pub logdet_logabs: f64,
}

impl BenchRecord {
    pub fn from_run(algorithm: Algorithm, n: usize, p: usize, run: usize, r: &RunResult) -> Self {
        Self {
            algorithm,
            n,
            p,
            run,
            total_seconds: r.stats.total_seconds,
            scatter_seconds: r.stats.scatter_seconds,
            comm_seconds: r.stats.comm_seconds,
            logdet_sign: r.logdet.sign.as_i8(),
            logdet_logabs: r.logdet.log_abs,
        }
    }

    pub fn logdet(&self) -> LogDet {
        LogDet::new(
            Sign::from_i8(self.logdet_sign).unwrap_or(Sign::Zero),
            self.logdet_logabs,
        )
    }

    fn validate(&self) -> Result<(), String> {
        if self.n == 0 || self.p == 0 {
            return Err("n and p must be positive".into());
        }
        if Sign::from_i8(self.logdet_sign).is_none() {
            return Err(format!("sign {} not in {{-1, 0, 1}}", self.logdet_sign));
        }
        let times = [self.total_seconds, self.scatter_seconds, self.comm_seconds];
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err("timings must be finite and non-negative".into());
        }
        if self.comm_seconds > self.total_seconds {
            return Err("comm_s exceeds total_s".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("missing or wrong header (expected '{CSV_HEADER}')")]
    Header,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Writes records with the fixed header.
pub fn write_records<W: Write>(out: W, records: &[BenchRecord]) -> Result<(), CsvError> {
    let mut w = RecordWriter::new(out)?;
    for r in records {
        w.record(r)?;
    }
    w.finish()?;
    Ok(())
}

/// Incremental CSV writer that can interleave `#` comment lines.
pub struct RecordWriter<W: Write> {
    out: W,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut out: W) -> Result<Self, CsvError> {
        writeln!(out, "{CSV_HEADER}")?;
        Ok(Self { out })
    }

    pub fn record(&mut self, r: &BenchRecord) -> Result<(), CsvError> {
        let mut row = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::with_capacity(128));
        row.serialize(r)?;
        let bytes = row
            .into_inner()
            .map_err(|e| CsvError::Io(std::io::Error::other(e.to_string())))?;
        self.out.write_all(&bytes)?;
        Ok(())
    }

    pub fn comment(&mut self, text: &str) -> Result<(), CsvError> {
        writeln!(self.out, "# {text}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, CsvError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Parses a CSV produced by [`write_records`], with line numbers in errors.
pub fn read_records<R: Read>(input: R) -> Result<Vec<BenchRecord>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = rdr.headers().map_err(|_| CsvError::Header)?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(CsvError::Header);
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CsvError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let rec: BenchRecord = row.deserialize(None).map_err(|e| CsvError::Malformed {
            line,
            message: e.to_string(),
        })?;
        rec.validate()
            .map_err(|message| CsvError::Malformed { line, message })?;
        records.push(rec);
    }
    Ok(records)
}

/// Sweep parameters.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub workers: Vec<usize>,
    pub repeats: usize,
    pub kind: MatrixKind,
    pub seed: u64,
    /// Worker counts above this are skipped.
    pub max_workers: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![256, 512, 1024, 2048],
            workers: vec![1, 2, 4, 8],
            repeats: 5,
            kind: MatrixKind::UniformRandom,
            seed: 1,
            max_workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BenchEvent {
    Record(BenchRecord),
    Skipped {
        algorithm: Algorithm,
        n: usize,
        p: usize,
        reason: String,
    },
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("empty size or worker list")]
    EmptySweep,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("{algorithm} n={n} p={p}: {source}")]
    Run {
        algorithm: Algorithm,
        n: usize,
        p: usize,
        source: RunError,
    },
}

/// Runs the sweep strictly sequentially, reporting each record as it lands.
///
/// Parallel algorithms get one record per `(n, p, run)`. Serial algorithms
/// do not depend on `p`; they are run `|workers| * repeats` times per size
/// and recorded at `p = 1` with consecutive run indices.
pub fn run_bench(
    config: &BenchConfig,
    mut on_event: impl FnMut(BenchEvent),
) -> Result<(), BenchError> {
    if config.repeats == 0 {
        return Err(BenchError::NoRepeats);
    }
    if config.sizes.is_empty() || config.workers.is_empty() {
        return Err(BenchError::EmptySweep);
    }
    for &n in &config.sizes {
        let a = generate(&MatrixSpec::new(n, config.kind, config.seed))?;
        for alg in Algorithm::ALL {
            for (wi, &p) in config.workers.iter().enumerate() {
                if alg.is_parallel() {
                    let reason = if p == 0 || p > n {
                        Some(format!("p={p} outside 1..={n}"))
                    } else if config.max_workers.is_some_and(|cap| p > cap) {
                        Some(format!(
                            "p={p} above worker cap {}",
                            config.max_workers.unwrap()
                        ))
                    } else {
                        None
                    };
                    if let Some(reason) = reason {
                        on_event(BenchEvent::Skipped {
                            algorithm: alg,
                            n,
                            p,
                            reason,
                        });
                        continue;
                    }
                }
                for rep in 0..config.repeats {
                    let result = run_algorithm(alg, &a, p).map_err(|source| BenchError::Run {
                        algorithm: alg,
                        n,
                        p,
                        source,
                    })?;
                    let (rec_p, run) = if alg.is_parallel() {
                        (p, rep)
                    } else {
                        (1, wi * config.repeats + rep)
                    };
                    on_event(BenchEvent::Record(BenchRecord::from_run(
                        alg, n, rec_p, run, &result,
                    )));
                }
            }
        }
    }
    Ok(())
}
