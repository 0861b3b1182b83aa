//! `arvcanon`: command-line driver for canonical systems in Arov gauge.

mod commands;
mod error;
mod grids;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ARVCANON_THREADS";

#[derive(Parser, Debug)]
#[command(name = "arvcanon", version, about = "Transfer matrices, Weyl disks, Schur functions and spectral diagnostics of canonical systems")]
struct Cli {
    /// Worker threads (capped by ARVCANON_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transfer matrices A(z, l) on a (z, l) grid.
    Transfer(GridArgs),
    /// Weyl disk centers and radii on a (z, l) grid.
    Disks(GridArgs),
    /// Half-line Schur functions s+(z) and their stripped values s+(z, l).
    Schur(SchurArgs),
    /// Riccati flow of stripped Schur functions.
    Riccati(RiccatiArgs),
    /// Exponential type: integral formula against the growth of A(iy, l).
    Type(TypeArgs),
    /// Reflectionless defect |s+ - conj(s-)| on a boundary grid.
    Reflectionless(ReflectionlessArgs),
    /// Harmonic-measure defect of stripped Schur functions over a set e.
    Bp(BpArgs),
    /// Gauge changes of a solved family.
    Gauge(GaugeArgs),
}

#[derive(Args, Debug)]
pub struct ZArgs {
    /// Single spectral parameter, e.g. `i`, `1+0.5i` or `1,0.5`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// z grid: `re1,im1:re2,im2:n` or `iy:y1:y2:n[:log]`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "z")]
    pub zgrid: Option<String>,
}

#[derive(Args, Debug)]
pub struct LArgs {
    /// Single length.
    #[arg(long)]
    pub l: Option<f64>,
    /// Length grid: `a:b:step` or a comma list.
    #[arg(long, conflicts_with = "l")]
    pub lgrid: Option<String>,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Coefficient file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub z: ZArgs,
    #[command(flatten)]
    pub l: LArgs,
}

#[derive(Args, Debug)]
pub struct SchurArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub z: ZArgs,
    /// Lengths for the stripped values; only `l = 0` when omitted.
    #[command(flatten)]
    pub l: LArgs,
    /// Target Weyl disk radius.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Largest length inspected by the disk iteration; `1e4 / Im z` when omitted.
    #[arg(long)]
    pub lmax: Option<f64>,
    /// Treat the input as a mirrored left half-line and report s-(z).
    #[arg(long)]
    pub minus: bool,
}

#[derive(Args, Debug)]
pub struct RiccatiArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub z: ZArgs,
    #[command(flatten)]
    pub l: LArgs,
    /// Initial value; s+(z) when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<String>,
    /// Step in mu.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Disk tolerance used for the default initial value.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct TypeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Truncation length.
    #[arg(long)]
    pub l: f64,
}

#[derive(Args, Debug)]
pub struct ReflectionlessArgs {
    /// Left half-line, stored mirrored.
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    /// Boundary grid `a:b:n`.
    #[arg(long, allow_hyphen_values = true)]
    pub xgrid: String,
    /// Comma list of distances to the real axis.
    #[arg(long, default_value = "1e-2,1e-3,1e-4")]
    pub eps: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Largest length inspected by the disk iteration; `1e4 / Im z` when omitted.
    #[arg(long)]
    pub lmax: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BpArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    /// Union of intervals `a:b,c:d`.
    #[arg(long, allow_hyphen_values = true)]
    pub e: String,
    /// Arc `theta1:theta2` in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub arc: String,
    #[command(flatten)]
    pub l: LArgs,
    /// Quadrature step in x.
    #[arg(long, default_value_t = 0.05)]
    pub xstep: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Largest length inspected by the disk iteration; `1e4 / Im z` when omitted.
    #[arg(long)]
    pub lmax: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GaugeTarget {
    /// Recover Arov parameters; writes a coefficient file.
    Arov,
    /// Normalize A(0, l) = I; writes the family as CSV.
    Pdb,
}

#[derive(Args, Debug)]
pub struct GaugeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Family knots (must start at 0).
    #[arg(long)]
    pub lgrid: String,
    #[arg(long, value_enum, default_value = "arov")]
    pub to: GaugeTarget,
    /// Spectral parameters of the written family (PdB target).
    #[command(flatten)]
    pub z: ZArgs,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let cap = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::parse(format!("{THREADS_ENV}=`{v}` is not a positive integer")))?,
        ),
        Err(_) => None,
    };
    if flag == Some(0) {
        return Err(CliError::Validation("--threads must be positive".into()));
    }
    Ok(match (flag, cap) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot start thread pool: {e}")))?;
    }
    let text = commands::execute(&cli.command)?;
    output::emit(cli.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
