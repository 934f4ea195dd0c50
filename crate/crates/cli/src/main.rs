//! `lossbell`: envelopes, figure data, threshold tables, bound evaluation and
//! simulated experiments for lossy multi-site Bell tests.
//!
//! Every file written starts with a metadata block (tool version, command,
//! the effective configuration, seed, RNG identifier) and contains no
//! timestamps, so re-running a configuration reproduces it byte for byte.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 configuration or domain
//! error, 3 capacity exceeded, 4 incomplete experimental design.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Bad flag values or config files.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Parser, Debug)]
#[command(
    name = "lossbell",
    version,
    about = "Tight LHV bounds for lossy multi-site Bell tests"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat TOML file of flag values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "LOSSBELL_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate deterministic strategies and write the exact envelope.
    #[command(args_override_self = true)]
    Envelope(EnvelopeArgs),
    /// Write the data behind one of the four bound-versus-W figures.
    #[command(args_override_self = true)]
    Figure(FigureArgs),
    /// Efficiency thresholds over a range of site counts.
    #[command(args_override_self = true)]
    Threshold(ThresholdArgs),
    /// Evaluate the analytic bounds and the envelope at one W.
    #[command(args_override_self = true)]
    Bounds(BoundsArgs),
    /// Simulate a heralded GHZ experiment and test it against the bounds.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
}

pub const SUBCOMMANDS: [&str; 5] = ["envelope", "figure", "threshold", "bounds", "simulate"];

#[derive(Args, Debug, Clone)]
pub struct FunctionalArgs {
    /// chsh, mermin, ardehali, svetlichny, or natural (CHSH for two sites,
    /// Mermin for odd n, Ardehali for even n).
    #[arg(long, default_value = "natural")]
    pub functional: String,
    /// Signs (s_R, s_I) of the real and imaginary parts, e.g. "+-".
    #[arg(long, default_value = "++")]
    pub signs: String,
}

#[derive(Args, Debug)]
pub struct EnvelopeArgs {
    #[arg(long)]
    pub n: u32,
    #[command(flatten)]
    pub functional: FunctionalArgs,
    /// dp or direct.
    #[arg(long, default_value = "dp")]
    pub mode: String,
    /// Print the envelope at this W (decimal or num/den) to stdout.
    #[arg(long)]
    pub query: Option<String>,
    /// Number of random mixtures in the scatter file.
    #[arg(long, default_value_t = 2000)]
    pub scatter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Run the stochastic-model probe with this many trials.
    #[arg(long)]
    pub probe: Option<u64>,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    /// Figure 1: n=2 CHSH; 2: n=3 Mermin; 3: n=4 Ardehali; 4: n=6 Ardehali.
    #[arg(long)]
    pub which: u32,
    /// Grid step in W (and in η for the efficiency variant).
    #[arg(long, default_value_t = 1.0 / 256.0)]
    pub step: f64,
    #[arg(long, default_value_t = 2000)]
    pub scatter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    /// A site count or an inclusive range such as 3..8.
    #[arg(long, default_value = "2..8")]
    pub n: String,
    /// Functional used for the envelope crossing; natural picks per n.
    #[arg(long, default_value = "natural")]
    pub functional: String,
    /// Also write threshold.csv to the output directory.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: u32,
    #[command(flatten)]
    pub functional: FunctionalArgs,
    /// W as a decimal or num/den.
    #[arg(long)]
    pub w: String,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[command(flatten)]
    pub functional: FunctionalArgs,
    /// Symmetric efficiency.
    #[arg(long, conflicts_with = "etas")]
    pub eta: Option<f64>,
    /// Per-site efficiencies, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    /// Trials per setting word.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// A-setting angles in radians, comma separated; default is the optimum.
    #[arg(long, value_delimiter = ',', requires = "angles_b")]
    pub angles_a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', requires = "angles_a")]
    pub angles_b: Option<Vec<f64>>,
    /// Also write every trial record.
    #[arg(long)]
    pub write_trials: bool,
    /// Estimate from an existing trials CSV instead of simulating.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<lossbell::Error>() {
        Some(lossbell::Error::Domain(_) | lossbell::Error::Dimension(_)) => 2,
        Some(lossbell::Error::Capacity(_)) => 3,
        Some(lossbell::Error::IncompleteDesign(_)) => 4,
        _ => 1,
    }
}

fn run() -> anyhow::Result<()> {
    let argv = config::merge_config(std::env::args_os().collect(), &SUBCOMMANDS)?;
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(ConfigError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    commands::dispatch(&cli)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
