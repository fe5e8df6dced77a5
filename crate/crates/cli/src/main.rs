//! `amrpc` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use amrpc::ErrorCategory;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "amrpc", version, about = "aPC / aMR-PC surrogates and coefficient-based Sobol' analysis")]
struct Cli {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: AMRPC_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a design over the configured parameter space.
    Sample(SampleArgs),
    /// List analytic benchmarks or write a design/output pair for one.
    Bench(BenchArgs),
    /// Fit a surrogate to a design/output pair.
    Fit(FitArgs),
    /// Moments and sensitivity indices from a model file.
    Analyze(AnalyzeArgs),
    /// Prediction and moment errors against held-out data or a reference.
    Metrics(MetricsArgs),
    /// Per-cell mean, sd, log-variance and total-index field CSVs.
    Export(ExportArgs),
    /// Monte-Carlo pick-freeze indices of a benchmark model.
    Oracle(OracleArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Qmc,
    Mc,
}

#[derive(Args, Debug, Clone)]
struct DesignArgs {
    /// Number of design rows.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Leading Sobol' points to drop (QMC).
    #[arg(long)]
    skip: Option<u64>,
    /// Stream seed (MC).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Built-in parameter space (`table1`).
    #[arg(long)]
    preset: Option<String>,
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ModelSelect {
    /// Benchmark name (see `bench --list`).
    #[arg(long = "model")]
    name: Option<String>,
    /// g-function coefficients, comma separated.
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    /// field_toy grid as ROWSxCOLS.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    list: bool,
    #[command(flatten)]
    model: ModelSelect,
    #[command(flatten)]
    design: DesignArgs,
    /// Evaluate an existing design instead of sampling one.
    #[arg(long)]
    design_in: Option<PathBuf>,
    #[arg(long)]
    design_out: Option<PathBuf>,
    #[arg(long)]
    outputs_out: Option<PathBuf>,
    /// Also write Monte-Carlo reference statistics.
    #[arg(long)]
    reference_out: Option<PathBuf>,
    #[arg(long, default_value_t = 50_000)]
    reference_n: usize,
    #[arg(long, default_value_t = 0)]
    reference_seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Quantiles {
    Empirical,
    Marginal,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    design: Option<PathBuf>,
    #[arg(long)]
    outputs: Option<PathBuf>,
    /// Refinement level (0 = plain aPC).
    #[arg(long)]
    nr: Option<u32>,
    /// Maximal polynomial degree.
    #[arg(long)]
    no: Option<u32>,
    /// Hyperbolic truncation norm, 0 < q ≤ 1.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    rcond: Option<f64>,
    #[arg(long, value_enum)]
    quantiles: Option<Quantiles>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Any of `first`, `total`, `all` (every interaction subset).
    #[arg(long, value_delimiter = ',', default_value = "first,total")]
    indices: Vec<String>,
    /// Extra subsets as parameter names joined by `+`, e.g. `beta_sj+k_pm`.
    #[arg(long, value_delimiter = ',')]
    subsets: Vec<String>,
    #[arg(long)]
    var_floor: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Held-out `DESIGN.csv,OUTPUTS.csv`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    test: Option<Vec<PathBuf>>,
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    var_floor: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelSelect,
    #[arg(long, default_value_t = 200_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
    /// Restrict to these output cells.
    #[arg(long, value_delimiter = ',')]
    cells: Option<Vec<usize>>,
    #[arg(long)]
    var_floor: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error carrying its exit class.
#[derive(Debug)]
pub struct CliError {
    pub category: ErrorCategory,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            category: ErrorCategory::Config,
            message: msg.into(),
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self {
            category: ErrorCategory::Data,
            message: msg.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self.category {
            ErrorCategory::Config => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Numerical => 4,
        }
    }
}

impl From<amrpc::Error> for CliError {
    fn from(e: amrpc::Error) -> Self {
        Self {
            category: e.category(),
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn init_threads(flag: Option<usize>) -> CliResult<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("AMRPC_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("AMRPC_THREADS={v:?} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::config("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads(cli.threads)?;
    let cfg = commands::load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Sample(a) => commands::sample(&cfg, a),
        Command::Bench(a) => commands::bench(&cfg, a),
        Command::Fit(a) => commands::fit(&cfg, a),
        Command::Analyze(a) => commands::analyze(&cfg, a),
        Command::Metrics(a) => commands::metrics(&cfg, a),
        Command::Export(a) => commands::export(&cfg, a),
        Command::Oracle(a) => commands::oracle(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code())
        }
    }
}
