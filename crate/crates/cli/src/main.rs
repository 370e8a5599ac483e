//! `polycond`: Frank-Wolfe solves, condition-measure reports and seeded
//! experiments from the command line.
//!
//! Exit codes: 0 success, 1 input error, 2 no convergence within the
//! iteration cap, 3 guard, cap or invariant violation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polycond::{Error, ErrorClass};

/// Environment variable holding the default master seed of `experiment`.
pub const SEED_ENV: &str = "POLYCOND_SEED";

#[derive(Parser, Debug)]
#[command(name = "polycond", version, about = "Frank-Wolfe solvers and polytope condition measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimize a quadratic over the convex hull of a vertex file.
    Solve(SolveArgs),
    /// Compute the condition measures of a point set as one CSV row.
    Cond(CondArgs),
    /// Run a named experiment from a key=value config file.
    Experiment(ExperimentArgs),
    /// Re-aggregate trial CSVs into summaries and plot data.
    Report(ReportArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SolveVariant {
    Wolfe,
    Vanilla,
    Away,
    Pairwise,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Vertex file: one point per line, whitespace-separated coordinates.
    vertices: PathBuf,
    /// Point b of the objective 1/2 (x - b)^T Q (x - b); the origin if unset.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    target: Option<Vec<f64>>,
    /// Diagonal of Q; the identity if unset. Not available with wolfe.
    #[arg(long = "q-diag", value_delimiter = ',', allow_hyphen_values = true)]
    q_diag: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = SolveVariant::Wolfe)]
    variant: SolveVariant,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
    /// Write the solution here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CondArgs {
    /// Vertex file; omit when using --cube.
    #[arg(required_unless_present = "cube", conflicts_with = "cube")]
    vertices: Option<PathBuf>,
    /// Use the corners of [0,1]^D.
    #[arg(long, value_name = "D")]
    cube: Option<usize>,
    /// Comma-separated subset of width,minwidth,phi,vf.
    #[arg(long, value_delimiter = ',', default_value = "width,minwidth,phi,vf")]
    measures: Vec<String>,
    #[arg(long = "subset-cap", default_value_t = polycond::conditioning::MINWIDTH_SUBSET_CAP)]
    subset_cap: usize,
    #[arg(long = "face-cap", default_value_t = polycond::conditioning::FACE_CAP)]
    face_cap: usize,
    /// Write the header and row here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Config file of key=value lines.
    config: PathBuf,
    /// Master seed, overriding the config and the environment.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output path prefix, overriding the config's `output` key. Defaults
    /// to the config path without its extension.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Trial CSVs written by `experiment`; shards are merged.
    #[arg(required = true)]
    trials: Vec<PathBuf>,
    /// Directory for summary.csv, summary.txt and the .dat plot files.
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Input => 1,
        ErrorClass::NonConvergence => 2,
        ErrorClass::Guard => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Cond(a) => commands::cond(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
