//! Command-line front end: reproducible fits, predictions, and experiment
//! pipelines on top of the `mrlsr` library.
//!
//! Every command is a pure function of its flags and input files; all
//! randomness flows from an explicit `--seed`, with per-stage sub-seeds
//! derived deterministically. Outputs are flat CSV or JSON. Exit codes:
//! 0 success, 1 usage or input error, 2 numerical failure.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(
    name = "mrlsr",
    about = "Kernel least-squares regression with a variable penalty exponent",
    version
)]
struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic benchmark dataset as CSV.
    Synth {
        /// Number of rows.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Suppress the unit-variance Gaussian noise on the targets.
        #[arg(long)]
        no_noise: bool,
        /// Output CSV path.
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Print dataset and kernel statistics (size, bandwidth, Gram range).
    Gram {
        #[arg(long)]
        data: std::path::PathBuf,
        /// Target column, by header name or 0-based index.
        #[arg(long)]
        target: String,
        /// Kernel bandwidth; defaults to the mean pairwise squared distance.
        #[arg(long)]
        mu: Option<f64>,
        /// Print the statistics (the default and only action).
        #[arg(long, default_value_t = true)]
        stats: bool,
    },

    /// Fit a model and write it as JSON.
    Fit {
        #[arg(long)]
        data: std::path::PathBuf,
        #[arg(long)]
        target: String,
        /// Penalty exponent.
        #[arg(long)]
        m: f64,
        /// Penalty weight.
        #[arg(long)]
        lambda: f64,
        /// Kernel bandwidth; defaults to the mean pairwise squared distance.
        #[arg(long)]
        mu: Option<f64>,
        /// Root-search residual tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Root-search iteration cap.
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Evaluate a fitted model on query points.
    Predict {
        /// Model JSON written by `fit`.
        #[arg(long)]
        model: std::path::PathBuf,
        /// CSV of query rows; all columns are features unless --target
        /// names a column to drop.
        #[arg(long)]
        data: std::path::PathBuf,
        /// Column to drop from the query CSV (for files that still carry
        /// the target).
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Two-phase cross-validation: exponent grid first, then penalty grid.
    Cv {
        #[arg(long)]
        data: std::path::PathBuf,
        #[arg(long)]
        target: String,
        /// Grid preset; "paper" is the reference protocol (exponents
        /// 0.1..2.9 step 0.1, seven log-spaced penalties 1e-5..1e2, ten
        /// folds, ten repeats).
        #[arg(long, default_value = "paper", value_parser = ["paper"])]
        protocol: String,
        /// Override the exponent grid (comma-separated).
        #[arg(long, value_delimiter = ',')]
        m_grid: Option<Vec<f64>>,
        /// Override the penalty grid (comma-separated).
        #[arg(long, value_delimiter = ',')]
        lambda_grid: Option<Vec<f64>>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
        /// Kernel bandwidth; defaults to the heuristic on the full set.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Learning curve: test error of both methods versus training size.
    Curve {
        #[arg(long)]
        data: std::path::PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        lambda: f64,
        /// Training fractions (comma-separated); default 0.1 to 1.0 in
        /// steps of 0.05.
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Calibrated-equivalence experiment across dataset parts.
    Zequiv {
        #[arg(long)]
        data: std::path::PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 4)]
        parts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Stability bound and its leave-one-out empirical check.
    Stability {
        #[arg(long)]
        data: std::path::PathBuf,
        #[arg(long)]
        target: String,
        /// Penalty exponent (the bound needs m >= 2).
        #[arg(long)]
        m: f64,
        #[arg(long)]
        lambda: f64,
        /// Rows held out of training to serve as the probe set.
        #[arg(long, default_value_t = 50)]
        probe_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },

    /// Cross-check the solver against the gradient-descent oracle on a
    /// small synthetic instance.
    OracleCheck {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Descent step budget.
        #[arg(long, default_value_t = 1_000_000)]
        steps: usize,
    },

    /// Full benchmark: two-phase selection versus the tuned ridge baseline.
    Bench {
        /// Built-in protocol dataset (only "synthetic").
        #[arg(long, default_value = "synthetic", value_parser = ["synthetic"])]
        paper_protocol: String,
        /// Use a CSV dataset instead of the built-in synthetic one.
        #[arg(long)]
        data: Option<std::path::PathBuf>,
        #[arg(long)]
        target: Option<String>,
        /// Rows of the synthetic dataset.
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Standardize features (zero mean, unit variance per column,
        /// statistics from the training split only).
        #[arg(long)]
        standardize: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: std::path::PathBuf,
    },
}

/// Exit code for a library error: input and configuration problems are
/// usage errors (1), everything that went wrong inside the numerics is 2.
fn exit_code(err: &mrlsr::Error) -> i32 {
    use mrlsr::Error::*;
    match err {
        Io { .. }
        | NotUtf8
        | EmptyInput
        | RaggedRow { .. }
        | BadCell { .. }
        | TargetColumnNotFound(_)
        | NoFeatureColumns
        | NonFinite { .. }
        | DimensionMismatch { .. }
        | InvalidParameter { .. }
        | FoldCountExceedsSamples { .. }
        | EmptySplit { .. }
        | InstanceTooLarge { .. }
        | ModelJson(_)
        | InvalidModel { .. } => 1,
        DegenerateBandwidth
        | NotPositiveSemidefinite { .. }
        | DecompositionFailed
        | DegenerateTargets { .. }
        | RootNotConverged { .. }
        | NoRootFound { .. }
        | LineSearchFailure { .. }
        | GradientSingularity { .. }
        | NonPositiveMaxTarget { .. } => 2,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version are successful outcomes, not usage errors
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    if let Ok(threads) = std::env::var("MRLSR_THREADS") {
        match threads.parse::<usize>() {
            Ok(k) if k > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
            _ => {
                eprintln!("error: MRLSR_THREADS must be a positive integer");
                std::process::exit(1);
            }
        }
    }

    match commands::run(cli.command) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}
