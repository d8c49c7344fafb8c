//! `qwalk`: experiments on coined quantum walks with absorbing walls.

mod commands;
mod config;
mod report;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    /// Exit code 2: bad flag or config value.
    pub fn config(flag: &str, msg: impl std::fmt::Display) -> Self {
        CliError { code: 2, message: format!("--{flag}: {msg}") }
    }

    /// Exit code 3: the run would exceed a resource cap.
    pub fn resource(flag: &str, msg: impl std::fmt::Display) -> Self {
        CliError { code: 3, message: format!("--{flag}: {msg}") }
    }

    /// Maps a library error; domain errors are blamed on `flag`.
    pub fn core(e: qwalk::Error, flag: &str) -> Self {
        match e {
            qwalk::Error::Domain { reason, .. } => CliError::config(flag, reason),
            e @ qwalk::Error::NonConvergence { .. } => CliError { code: 4, message: e.to_string() },
        }
    }

    fn io(e: std::io::Error) -> Self {
        CliError { code: 2, message: format!("--output: {e}") }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Coined quantum walks with absorbing walls")]
struct Cli {
    /// TOML file with option values; command-line flags take precedence.
    /// Keys are the long flag names, at top level or in a table named after
    /// the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a walk against one or two walls and record the absorption.
    Simulate(SimulateArgs),
    /// Escape-probability coefficient tables (one wall, or two walls with the
    /// left one far away).
    Tables(TablesArgs),
    /// Survival probability over time, its asymptote and a power-law fit.
    Decay(DecayArgs),
    /// The walk on Z^d: free evolution diagnostics or an absorbing hyperplane.
    Ddim(DdimArgs),
    /// Exit probabilities for a range of wall positions.
    Exit(ExitArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// csv (default) or json
    #[arg(long)]
    format: Option<String>,
    /// Write here instead of standard output.
    #[arg(long, short)]
    output: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct WalkArgs {
    /// hadamard, or rho=R[,phi=P][,psi=S][,eta=E]
    #[arg(long)]
    coin: Option<String>,
    /// L, R, alpha,beta (complex, e.g. 0.6,0.8i) or compensated:alpha,beta
    #[arg(long)]
    start: Option<String>,
    /// One wall at +M.
    #[arg(long, allow_negative_numbers = true)]
    wall: Option<String>,
    /// Two walls at -M_L and +M_R, given as M_L,M_R.
    #[arg(long, allow_negative_numbers = true)]
    walls: Option<String>,
    /// Number of steps T.
    #[arg(long, allow_negative_numbers = true)]
    steps: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    walk: WalkArgs,
    /// Send a Gaussian packet with this central wavevector at the wall
    /// instead of a point start; reports its speed and reflection.
    #[arg(long, allow_negative_numbers = true)]
    packet_k0: Option<String>,
    /// Envelope width of the packet, exp(-n^2/width^2).
    #[arg(long)]
    packet_width: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TablesArgs {
    /// 1 (one wall) or 2 (two walls, left wall at infinity).
    #[arg(long)]
    table: Option<String>,
    /// Rows for M = 1..=m-max, followed by the M -> infinity row.
    #[arg(long)]
    m_max: Option<String>,
    /// Coin parameter for table 1.
    #[arg(long)]
    rho: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DecayArgs {
    #[command(flatten)]
    walk: WalkArgs,
    /// Fit window a..b in steps (default T/100..T).
    #[arg(long)]
    window: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DdimArgs {
    /// Dimension d (1, 2 or 3).
    #[arg(long)]
    dim: Option<String>,
    /// hadamard, rho=R, rotation=THETA, or blocks=a,b,c,d;... (one per axis)
    #[arg(long)]
    coin: Option<String>,
    /// 2d complex direction amplitudes; direction 2j moves left along axis
    /// j, 2j+1 right (default: left-mover along axis 0).
    #[arg(long)]
    start: Option<String>,
    /// Absorbing hyperplane n_0 = M (free evolution without it).
    #[arg(long, allow_negative_numbers = true)]
    wall: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    steps: Option<String>,
    /// Leakage counts sites beyond v_max t + margin (default 10).
    #[arg(long)]
    front_margin: Option<String>,
    /// Refuse runs whose state buffers would exceed this many GiB (default 4).
    #[arg(long)]
    mem_cap_gib: Option<String>,
    /// Trailing steps used to extrapolate hyperplane survival (default T/2).
    #[arg(long)]
    tail: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ExitArgs {
    #[arg(long)]
    coin: Option<String>,
    #[arg(long)]
    start: Option<String>,
    /// Wall positions a..b (default 1..5).
    #[arg(long)]
    m_range: Option<String>,
    /// genfun (default), eigen, asymptotic (Hadamard only) or limit.
    #[arg(long)]
    method: Option<String>,
    /// Correction terms kept by the asymptotic series, 1..=5 (default 5).
    #[arg(long)]
    terms: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.config.as_deref();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(config, a),
        Command::Tables(a) => commands::tables(config, a),
        Command::Decay(a) => commands::decay(config, a),
        Command::Ddim(a) => commands::ddim(config, a),
        Command::Exit(a) => commands::exit(config, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
