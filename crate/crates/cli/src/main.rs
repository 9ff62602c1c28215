//! boxcorr: correlation, discrepancy and gap statistics of sequences on
//! the unit torus, with deterministic artifacts for plotting and CI.
//!
//! Exit codes: 0 success, 1 computation-domain error, 2 usage error.
//! Output bytes depend only on the flags (including --seed); --threads
//! and the BOXCORR_THREADS fallback change wall time only.

mod emit;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use boxcorr::{
    check_box_convergence, check_gh_limit, check_non_convergence, default_tolerance, gap_profile,
    gh_integral_closed, gh_integral_parts, hinge_sum, load, parse_alpha, phi, prefix_gap_scan,
    r_stat, star_discrepancy, sweep, CorrelationQuery, ExperimentReport, PointSet, SequenceSpec,
    Source, Verdict,
};
use emit::{Cell, Document, Format};

#[derive(Parser)]
#[command(
    name = "boxcorr",
    version,
    about = "Correlation, discrepancy and gap statistics for sequences on the unit torus"
)]
struct Cli {
    /// Worker threads (default: all cores; BOXCORR_THREADS overrides the
    /// default). Never changes output bytes.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Artifact format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the artifact to this path instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Stamp elapsed milliseconds into the artifact. Off by default so
    /// repeated runs stay byte-identical.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    /// Rotation by a fixed constant: frac(i * alpha), i = 1..n.
    Kronecker,
    /// Digit-reversal (radical inverse) in a fixed base.
    Vdc,
    /// Seeded uniform stream.
    Random,
}

#[derive(Args, Clone, Debug)]
struct SourceArgs {
    /// Sequence family to generate.
    #[arg(long, value_enum, conflicts_with = "input")]
    kind: Option<Kind>,

    /// Rotation constant: a decimal, or sqrt2 | sqrt2_over_5 | golden.
    #[arg(long)]
    alpha: Option<String>,

    /// Digit-reversal base (at least 2).
    #[arg(long)]
    base: Option<u32>,

    /// Emit 0 as the first digit-reversal point.
    #[arg(long)]
    include_zero: bool,

    /// Seed of the uniform stream.
    #[arg(long)]
    seed: Option<u64>,

    /// Load points from a file (one decimal per line, # comments) instead
    /// of generating them.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
}

impl SourceArgs {
    fn reject(&self, inapplicable: &[(&str, bool)], context: &str) -> Result<(), String> {
        for (flag, set) in inapplicable {
            if *set {
                return Err(format!("{flag} does not apply to {context}"));
            }
        }
        Ok(())
    }

    fn resolve(&self) -> Result<SequenceSpec, String> {
        if let Some(path) = &self.input {
            self.reject(
                &[
                    ("--alpha", self.alpha.is_some()),
                    ("--base", self.base.is_some()),
                    ("--include-zero", self.include_zero),
                    ("--seed", self.seed.is_some()),
                ],
                "--input",
            )?;
            return Ok(SequenceSpec::File { path: path.clone() });
        }
        let Some(kind) = self.kind else {
            return Err("a point source is required: pass --kind or --input".into());
        };
        match kind {
            Kind::Kronecker => {
                self.reject(
                    &[
                        ("--base", self.base.is_some()),
                        ("--include-zero", self.include_zero),
                        ("--seed", self.seed.is_some()),
                    ],
                    "--kind kronecker",
                )?;
                let token = self
                    .alpha
                    .as_deref()
                    .ok_or("--kind kronecker requires --alpha")?;
                let alpha = parse_alpha(token).map_err(|e| format!("--alpha: {e}"))?;
                Ok(SequenceSpec::Kronecker { alpha })
            }
            Kind::Vdc => {
                self.reject(
                    &[
                        ("--alpha", self.alpha.is_some()),
                        ("--seed", self.seed.is_some()),
                    ],
                    "--kind vdc",
                )?;
                let base = self.base.ok_or("--kind vdc requires --base")?;
                if base < 2 {
                    return Err(format!("--base must be at least 2, got {base}"));
                }
                Ok(SequenceSpec::VanDerCorput {
                    base,
                    include_zero: self.include_zero,
                })
            }
            Kind::Random => {
                self.reject(
                    &[
                        ("--alpha", self.alpha.is_some()),
                        ("--base", self.base.is_some()),
                        ("--include-zero", self.include_zero),
                    ],
                    "--kind random",
                )?;
                let seed = self.seed.ok_or("--kind random requires --seed")?;
                Ok(SequenceSpec::UniformRandom { seed })
            }
        }
    }
}

#[derive(Args, Clone, Debug)]
struct QueryArgs {
    /// Tuple size; inferred as (number of scales) + 1 when omitted, and
    /// must agree when given.
    #[arg(long)]
    k: Option<usize>,

    /// Window shrink exponent, in (0, 1].
    #[arg(long)]
    beta: f64,

    /// Comma-separated window scales s_1,...,s_{k-1}.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    s: Vec<f64>,
}

impl QueryArgs {
    fn build(&self) -> Result<CorrelationQuery, AppError> {
        let inferred = self.s.len() + 1;
        if let Some(k) = self.k {
            if k != inferred {
                return Err(AppError::Usage(format!(
                    "--k {k} disagrees with --s: {} scale(s) imply k={inferred}",
                    self.s.len()
                )));
            }
        }
        CorrelationQuery::new(inferred, self.beta, self.s.clone())
            .map_err(|e| AppError::Usage(e.to_string()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit the first n points of a sequence, one decimal per line.
    Gen {
        #[command(flatten)]
        source: SourceArgs,
        /// Number of points.
        #[arg(long)]
        n: usize,
    },
    /// Box-correlation statistic R at one prefix length.
    Corr {
        #[command(flatten)]
        source: SourceArgs,
        /// Prefix length (defaults to the whole file with --input).
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Box-correlation statistic along a grid of prefix lengths.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        /// Comma-separated prefix lengths.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        grid: Vec<usize>,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Product integral of the two localised counts, with its tuple and
    /// diagonal parts and the predicted limit.
    Gh {
        #[command(flatten)]
        source: SourceArgs,
        /// Prefix length (defaults to the whole file with --input).
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Star discrepancy of the first n points (or along --grid).
    Discrepancy {
        #[command(flatten)]
        source: SourceArgs,
        /// Prefix length (defaults to the whole file with --input).
        #[arg(long, conflicts_with = "grid")]
        n: Option<usize>,
        /// Comma-separated prefix lengths, one row each.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        grid: Option<Vec<usize>>,
    },
    /// Distinct circular gaps of the first n points, or one row per
    /// prefix with --scan.
    Gaps {
        #[command(flatten)]
        source: SourceArgs,
        /// Prefix length (defaults to the whole file with --input).
        #[arg(long)]
        n: Option<usize>,
        /// Cluster width: gaps closer than this count as one value.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Emit (N, distinct, gap_sum) for every prefix length.
        #[arg(long)]
        scan: bool,
    },
    /// Limit experiments with a pass/fail verdict.
    Verify {
        #[command(subcommand)]
        check: VerifyCheck,
    },
}

#[derive(Subcommand)]
enum VerifyCheck {
    /// Box statistic approaches prod(2 s_l) along a length grid.
    Convergence {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        query: QueryArgs,
        /// Comma-separated prefix lengths (default 1250,...,20000).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        grid: Option<Vec<usize>>,
        /// Pass tolerance at the final length (default: fluctuation
        /// heuristic for the query).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Product integral approaches its predicted limit along the grid.
    GhLimit {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        query: QueryArgs,
        /// Comma-separated prefix lengths (default 1250,...,20000).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        grid: Option<Vec<usize>>,
        /// Pass tolerance at the final length (default: fluctuation
        /// heuristic for the query).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Search a scale grid for persistent deviation of the box statistic
    /// at beta = 1 (passes when a witness scale deviates at every length
    /// in the tail of the grid).
    ThmGaps {
        #[command(flatten)]
        source: SourceArgs,
        /// Tuple size.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Comma-separated window scales to search (default 0.1..3.0).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        s_grid: Option<Vec<f64>>,
        /// Comma-separated prefix lengths (default 625,...,10000).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        n_grid: Option<Vec<usize>>,
        /// Minimum persistent |R - target| for a pass.
        #[arg(long, default_value_t = 0.15)]
        threshold: f64,
    },
}

enum AppError {
    Usage(String),
    Domain(boxcorr::Error),
}

impl From<boxcorr::Error> for AppError {
    fn from(e: boxcorr::Error) -> Self {
        AppError::Domain(e)
    }
}

impl From<String> for AppError {
    fn from(msg: String) -> Self {
        AppError::Usage(msg)
    }
}

/// Points for single-length commands: --n when given, the whole file for
/// --input without --n.
fn materialize(spec: &SequenceSpec, n: Option<usize>) -> Result<PointSet, AppError> {
    match (spec, n) {
        (_, Some(n)) => Ok(spec.points(n)?),
        (SequenceSpec::File { path }, None) => Ok(load(path)?),
        (_, None) => Err(AppError::Usage(
            "--n is required unless --input is given".into(),
        )),
    }
}

fn spec_config(doc: &mut Document, spec: &SequenceSpec) {
    doc.config("spec", Cell::Text(spec.to_string()));
    if let Some(seed) = spec.seed() {
        doc.config("seed", Cell::UInt(seed));
    }
}

fn stat_row(n: usize, raw: u128, observed: f64, target: f64) -> Vec<Cell> {
    vec![
        Cell::UInt(n as u64),
        Cell::BigUInt(raw),
        Cell::Float(observed),
        Cell::Float(target),
        Cell::Float((observed - target).abs()),
    ]
}

fn report_doc(command: &'static str, report: &ExperimentReport) -> Document {
    let mut doc = Document::new(command, vec!["N", "R", "target", "abs_error"]);
    doc.config("id", Cell::Text(report.id.clone()));
    doc.config("spec", Cell::Text(report.spec.clone()));
    doc.config("query", Cell::Text(report.query.clone()));
    if let Some(seed) = report.seed {
        doc.config("seed", Cell::UInt(seed));
    }
    doc.config("tolerance", Cell::Float(report.tolerance));
    doc.config("predicate", Cell::Text(report.predicate.clone()));
    for row in &report.rows {
        doc.row(vec![
            Cell::UInt(row.n as u64),
            Cell::Float(row.observed),
            Cell::Float(row.target),
            Cell::Float(row.abs_error),
        ]);
    }
    doc.verdict = Some(match report.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    });
    doc
}

const DEFAULT_VERIFY_GRID: [usize; 5] = [1250, 2500, 5000, 10_000, 20_000];
const DEFAULT_DEVIATION_GRID: [usize; 5] = [625, 1250, 2500, 5000, 10_000];

fn run(command: &Command) -> Result<Document, AppError> {
    match command {
        Command::Gen { source, n } => {
            let spec = source.resolve()?;
            let points = spec.points(*n)?;
            let mut doc = Document::new("gen", vec!["value"]);
            doc.headerless_csv = true;
            spec_config(&mut doc, &spec);
            doc.config("n", Cell::UInt(*n as u64));
            for &v in points.values() {
                doc.row(vec![Cell::Float(v)]);
            }
            Ok(doc)
        }
        Command::Corr { source, n, query } => {
            let spec = source.resolve()?;
            let q = query.build()?;
            let points = materialize(&spec, *n)?;
            let r = r_stat(&points, &q)?;
            let mut doc = Document::new("corr", vec!["N", "raw_count", "R", "target", "abs_error"]);
            spec_config(&mut doc, &spec);
            doc.config("query", Cell::Text(q.to_string()));
            doc.row(stat_row(r.n, r.raw_count, r.normalized, r.target));
            Ok(doc)
        }
        Command::Sweep {
            source,
            grid,
            query,
        } => {
            let spec = source.resolve()?;
            let q = query.build()?;
            let src = match spec {
                SequenceSpec::File { ref path } => Source::Points(load(path)?),
                ref generated => Source::Spec(generated.clone()),
            };
            let rows = sweep(&src, &q, grid)?;
            let mut doc =
                Document::new("sweep", vec!["N", "raw_count", "R", "target", "abs_error"]);
            spec_config(&mut doc, &spec);
            doc.config("query", Cell::Text(q.to_string()));
            doc.config(
                "grid",
                Cell::UIntList(grid.iter().map(|&n| n as u64).collect()),
            );
            for (n, r) in rows {
                doc.row(stat_row(n, r.raw_count, r.normalized, r.target));
            }
            Ok(doc)
        }
        Command::Gh { source, n, query } => {
            let spec = source.resolve()?;
            let q = query.build()?;
            let points = materialize(&spec, *n)?;
            let closed = gh_integral_closed(&points, &q)?;
            let (tuple, diagonal) = gh_integral_parts(&points, &q)?;
            let hinge = hinge_sum(&points, &q)?;
            let target = if q.beta() < 1.0 {
                q.s().iter().map(|&s| s * s).product()
            } else {
                phi(q.s())?
            };
            let mut doc = Document::new(
                "gh",
                vec![
                    "N",
                    "integral",
                    "tuple_term",
                    "diagonal_term",
                    "hinge_sum",
                    "target",
                    "abs_error",
                ],
            );
            spec_config(&mut doc, &spec);
            doc.config("query", Cell::Text(q.to_string()));
            doc.row(vec![
                Cell::UInt(points.len() as u64),
                Cell::Float(closed),
                Cell::Float(tuple),
                Cell::Float(diagonal),
                Cell::Float(hinge),
                Cell::Float(target),
                Cell::Float((closed - target).abs()),
            ]);
            Ok(doc)
        }
        Command::Discrepancy { source, n, grid } => {
            let spec = source.resolve()?;
            let lengths: Vec<usize> = match grid {
                Some(grid) => grid.clone(),
                None => vec![materialize(&spec, *n)?.len()],
            };
            let mut doc = Document::new("discrepancy", vec!["N", "d_star", "argmax_prefix"]);
            spec_config(&mut doc, &spec);
            for &m in &lengths {
                let d = star_discrepancy(&spec.points(m)?)?;
                doc.row(vec![
                    Cell::UInt(m as u64),
                    Cell::Float(d.d_star),
                    Cell::Float(d.argmax_prefix),
                ]);
            }
            Ok(doc)
        }
        Command::Gaps {
            source,
            n,
            tol,
            scan,
        } => {
            let spec = source.resolve()?;
            let points = materialize(&spec, *n)?;
            let mut doc = if *scan {
                let mut doc = Document::new("gaps", vec!["N", "distinct", "gap_sum"]);
                for row in prefix_gap_scan(&points, *tol)? {
                    doc.row(vec![
                        Cell::UInt(row.n as u64),
                        Cell::UInt(row.distinct as u64),
                        Cell::Float(row.gap_sum),
                    ]);
                }
                doc
            } else {
                let profile = gap_profile(&points, *tol)?;
                let mut doc = Document::new("gaps", vec!["gap", "count"]);
                for (gap, count) in profile.gaps {
                    doc.row(vec![Cell::Float(gap), Cell::UInt(count as u64)]);
                }
                doc
            };
            // Prepend the source and knobs in front of whichever table shape
            // was built.
            let mut config = Vec::new();
            std::mem::swap(&mut config, &mut doc.config);
            spec_config(&mut doc, &spec);
            doc.config("n", Cell::UInt(points.len() as u64));
            doc.config("tol", Cell::Float(*tol));
            doc.config.extend(config);
            Ok(doc)
        }
        Command::Verify { check } => run_verify(check),
    }
}

fn run_verify(check: &VerifyCheck) -> Result<Document, AppError> {
    match check {
        VerifyCheck::Convergence {
            source,
            query,
            grid,
            tol,
        } => {
            let spec = source.resolve()?;
            let q = query.build()?;
            let grid = grid.clone().unwrap_or_else(|| DEFAULT_VERIFY_GRID.to_vec());
            let tol = tol.unwrap_or_else(|| default_tolerance(&q, *grid.last().unwrap_or(&0)));
            let report = check_box_convergence(&spec, &q, &grid, tol)?;
            Ok(report_doc("verify convergence", &report))
        }
        VerifyCheck::GhLimit {
            source,
            query,
            grid,
            tol,
        } => {
            let spec = source.resolve()?;
            let q = query.build()?;
            let grid = grid.clone().unwrap_or_else(|| DEFAULT_VERIFY_GRID.to_vec());
            let tol = tol.unwrap_or_else(|| default_tolerance(&q, *grid.last().unwrap_or(&0)));
            let report = check_gh_limit(&spec, &q, &grid, tol)?;
            Ok(report_doc("verify gh-limit", &report))
        }
        VerifyCheck::ThmGaps {
            source,
            k,
            s_grid,
            n_grid,
            threshold,
        } => {
            let spec = source.resolve()?;
            let s_grid = s_grid
                .clone()
                .unwrap_or_else(|| (1..=30).map(|i| f64::from(i) / 10.0).collect());
            let n_grid = n_grid
                .clone()
                .unwrap_or_else(|| DEFAULT_DEVIATION_GRID.to_vec());
            let report = check_non_convergence(&spec, *k, &s_grid, &n_grid, *threshold)?;
            let mut doc = report_doc("verify thm-gaps", &report);
            doc.config("s_grid", Cell::FloatList(s_grid));
            doc.config(
                "n_grid",
                Cell::UIntList(n_grid.iter().map(|&n| n as u64).collect()),
            );
            Ok(doc)
        }
    }
}

/// --threads wins; BOXCORR_THREADS is the fallback; both must be positive.
fn thread_override(flag: Option<usize>) -> Result<Option<usize>, String> {
    if let Some(t) = flag {
        if t == 0 {
            return Err("--threads must be at least 1".into());
        }
        return Ok(Some(t));
    }
    match std::env::var("BOXCORR_THREADS") {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(Some(t)),
            _ => Err(format!(
                "BOXCORR_THREADS must be a positive integer, got {raw:?}"
            )),
        },
        Err(_) => Ok(None),
    }
}

#[cfg(feature = "parallel")]
fn init_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .expect("thread pool is initialized exactly once");
    }
}

#[cfg(not(feature = "parallel"))]
fn init_threads(_threads: Option<usize>) {}

fn usage_exit(message: &str) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::ValueValidation, message)
        .exit()
}

fn main() {
    let cli = Cli::parse();
    match thread_override(cli.threads) {
        Ok(threads) => init_threads(threads),
        Err(message) => usage_exit(&message),
    }
    let start = Instant::now();
    match run(&cli.command) {
        Ok(mut doc) => {
            if cli.timing {
                doc.timing_ms = Some(start.elapsed().as_millis());
            }
            let artifact = doc.render(cli.format);
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &artifact),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(artifact.as_bytes())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                std::process::exit(1);
            }
        }
        Err(AppError::Usage(message)) => usage_exit(&message),
        Err(AppError::Domain(e)) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
