//! `mcnd`: generate matrices, compute log-determinants, run and summarise
//! benchmark sweeps.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or format error,
//! 3 engine failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use mcnd::bench::{
    build_report, read_records, run_algorithm, run_bench, Algorithm, BenchConfig, BenchEvent,
    BenchRecord, RecordWriter,
};
use mcnd::matrix::{self, DenseMatrix, MatrixError, MatrixKind, MatrixSpec};

const THREADS_ENV: &str = "MCND_THREADS";

#[derive(Parser)]
#[command(
    name = "mcnd",
    version,
    about = "Log-determinants by parallel matrix condensation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic matrix file (.csv extension writes CSV).
    Gen {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value = "uniform", value_parser = parse_kind)]
        kind: MatrixKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the log-determinant of a matrix file.
    Logdet {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, default_value = "mc-parallel", value_parser = parse_algorithm)]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Also print the result as a benchmark CSV row.
        #[arg(long)]
        csv: bool,
    },
    /// Run a benchmark sweep and write one CSV row per run.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [256, 512, 1024, 2048])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8])]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value = "uniform", value_parser = parse_kind)]
        kind: MatrixKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarise a benchmark CSV: speedups and communication times.
    Report {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
}

fn parse_kind(s: &str) -> Result<MatrixKind, String> {
    s.parse()
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

enum Failure {
    Usage(anyhow::Error),
    Io(anyhow::Error),
    Engine(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Engine(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Io(e) | Failure::Engine(e) => e,
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow::anyhow!("{msg}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen {
            size,
            kind,
            seed,
            out,
        } => cmd_gen(size, kind, seed, &out),
        Command::Logdet {
            input,
            algorithm,
            workers,
            csv,
        } => cmd_logdet(&input, algorithm, workers, csv),
        Command::Bench {
            sizes,
            workers,
            repeats,
            kind,
            seed,
            out,
        } => cmd_bench(
            BenchConfig {
                sizes,
                workers,
                repeats,
                kind,
                seed,
                max_workers: thread_cap()?,
            },
            out.as_deref(),
        ),
        Command::Report { input, format, out } => cmd_report(&input, format, out.as_deref()),
    }
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(usage(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn cmd_gen(size: usize, kind: MatrixKind, seed: u64, out: &Path) -> Result<(), Failure> {
    let m = matrix::generate(&MatrixSpec::new(size, kind, seed)).map_err(|e| match e {
        MatrixError::InvalidSize => usage("invalid size: --size must be at least 1"),
        other => Failure::Engine(other.into()),
    })?;
    let written = if is_csv(out) {
        matrix::write_csv(&m, out)
    } else {
        matrix::write_matrix(&m, out)
    };
    written
        .with_context(|| format!("writing {}", out.display()))
        .map_err(Failure::Io)?;
    eprintln!(
        "wrote {size}x{size} {kind} matrix (seed {seed}) to {}",
        out.display()
    );
    Ok(())
}

fn load(path: &Path) -> Result<DenseMatrix, Failure> {
    let m = if is_csv(path) {
        matrix::read_csv(path)
    } else {
        matrix::read_matrix(path)
    };
    m.with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Io)
}

fn cmd_logdet(
    input: &Path,
    algorithm: Algorithm,
    workers: usize,
    csv: bool,
) -> Result<(), Failure> {
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let a = load(input)?;
    if !a.is_square() {
        return Err(Failure::Io(anyhow::anyhow!(
            "{} holds a {}x{} matrix; a square matrix is required",
            input.display(),
            a.n_rows(),
            a.n_cols()
        )));
    }
    let n = a.n_rows();
    let mut p = workers;
    if algorithm.is_parallel() {
        if p > n {
            return Err(usage(format!("--workers {p} exceeds matrix size {n}")));
        }
        if let Some(cap) = thread_cap()? {
            if p > cap {
                eprintln!("warning: {THREADS_ENV}={cap} caps --workers {p}; using {cap}");
                p = cap;
            }
        }
    } else {
        p = 1;
    }

    let result = run_algorithm(algorithm, &a, p).map_err(|e| Failure::Engine(e.into()))?;
    let status = if result.logdet.is_singular() {
        "singular"
    } else {
        "ok"
    };
    let s = &result.stats;
    let mut out = io::stdout().lock();
    let print = |out: &mut io::StdoutLock| -> io::Result<()> {
        writeln!(
            out,
            "status={status} algorithm={algorithm} n={n} workers={p}"
        )?;
        writeln!(out, "{}", result.logdet)?;
        writeln!(
            out,
            "broadcasts={} broadcast_bytes={} pivot_search_msgs={} pivot_search_bytes={} \
             gathers={} gather_bytes={} reductions={} reduce_bytes={}",
            s.broadcasts,
            s.broadcast_bytes,
            s.pivot_search_msgs,
            s.pivot_search_bytes,
            s.gathers,
            s.gather_bytes,
            s.reductions,
            s.reduce_bytes
        )?;
        writeln!(
            out,
            "scatter_s={:.6} comm_s={:.6} compute_s={:.6} total_s={:.6}",
            s.scatter_seconds, s.comm_seconds, s.compute_seconds, s.total_seconds
        )
    };
    print(&mut out).map_err(|e| Failure::Io(e.into()))?;
    if csv {
        let rec = BenchRecord::from_run(algorithm, n, p, 0, &result);
        mcnd::bench::write_records(&mut out, &[rec]).map_err(|e| Failure::Io(e.into()))?;
    }
    Ok(())
}

fn cmd_bench(config: BenchConfig, out: Option<&Path>) -> Result<(), Failure> {
    if config.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    if config.sizes.contains(&0) {
        return Err(usage("invalid size: sizes must be at least 1"));
    }
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path)
                .with_context(|| format!("creating {}", path.display()))
                .map_err(Failure::Io)?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    let mut writer = RecordWriter::new(sink).map_err(|e| Failure::Io(e.into()))?;
    let mut io_error = None;
    let outcome = run_bench(&config, |event| {
        if io_error.is_some() {
            return;
        }
        let written = match &event {
            BenchEvent::Record(r) => {
                eprintln!(
                    "{} n={} p={} run={} total_s={:.6} comm_s={:.6}",
                    r.algorithm, r.n, r.p, r.run, r.total_seconds, r.comm_seconds
                );
                writer.record(r)
            }
            BenchEvent::Skipped {
                algorithm,
                n,
                p,
                reason,
            } => {
                let text = format!("skipped algorithm={algorithm} n={n} p={p}: {reason}");
                eprintln!("warning: {text}");
                writer.comment(&text)
            }
        };
        if let Err(e) = written {
            io_error = Some(e);
        }
    });
    if let Some(e) = io_error {
        return Err(Failure::Io(e.into()));
    }
    outcome.map_err(|e| Failure::Engine(e.into()))?;
    writer.finish().map_err(|e| Failure::Io(e.into()))?;
    Ok(())
}

fn cmd_report(input: &Path, format: ReportFormat, out: Option<&Path>) -> Result<(), Failure> {
    let file = File::open(input)
        .with_context(|| format!("opening {}", input.display()))
        .map_err(Failure::Io)?;
    let records = read_records(file)
        .with_context(|| format!("parsing {}", input.display()))
        .map_err(Failure::Io)?;
    let report = build_report(&records)
        .with_context(|| format!("summarising {}", input.display()))
        .map_err(Failure::Io)?;
    let text = match format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Csv => report.to_csv(),
    };
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Io),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.into())),
    }
}
