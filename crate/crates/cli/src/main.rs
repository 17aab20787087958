//! `mzfringe`: fringe-contrast tables for a Mach-Zehnder atom
//! interferometer with thermally expanding clouds.
//!
//! Every subcommand emits a CSV or JSON artifact whose first metadata
//! line embeds the fully resolved configuration, so plots stay
//! reproducible from the artifact alone.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, bad config file, or invalid physical inputs. Exit 2.
    #[error("config error: {0}")]
    Config(String),
    /// Quadrature or optimizer failure on otherwise valid inputs. Exit 3.
    #[error("numerical failure: {0}")]
    Numeric(mzfringe::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<mzfringe::Error> for CliError {
    fn from(err: mzfringe::Error) -> Self {
        match err {
            mzfringe::Error::Domain(_) => CliError::Config(err.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "mzfringe",
    version,
    about = "Mach-Zehnder fringe contrast under thermal cloud expansion"
)]
struct Cli {
    /// TOML-free JSON config file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Scenario preset: normal, better, or ideal.
    #[arg(long, global = true, value_name = "NAME")]
    scenario: Option<String>,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Apply per-pulse intensity compensation.
    #[arg(long, global = true)]
    compensated: bool,

    /// Monte Carlo sample count (also enables MC in `fringe`).
    #[arg(long, global = true, value_name = "N")]
    mc_samples: Option<usize>,

    /// Monte Carlo seed.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    /// Rayon worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cloud size and beam/cloud diameter ratio versus expansion time.
    Expansion {
        /// Last expansion time in seconds.
        #[arg(long, default_value_t = 1.6)]
        t_max: f64,
        #[arg(long, default_value_t = 161)]
        points: usize,
    },
    /// Ensemble-averaged Rabi curves P2(tau) at the pulse firing times.
    Rabi {
        /// Restrict to one pulse (1-3); default emits all three.
        #[arg(long, value_name = "INDEX", conflicts_with = "ratio")]
        pulse: Option<usize>,
        /// Synthetic frozen cloud with this beam/cloud diameter ratio
        /// instead of a pulse time.
        #[arg(long, value_name = "S")]
        ratio: Option<f64>,
        /// Longest pulse in units of the central pi time.
        #[arg(long, default_value_t = 2.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Interference fringe P2(phi3) plus a contrast summary.
    Fringe {
        #[arg(long, default_value_t = 73)]
        points: usize,
    },
    /// Pulse fidelity or fringe contrast versus a time axis.
    Sweep {
        #[arg(long, value_enum)]
        sweep: SweepKind,
        /// Axis start in seconds (default depends on the sweep).
        #[arg(long)]
        from: Option<f64>,
        /// Axis end in seconds (default depends on the sweep).
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 25)]
        points: usize,
    },
    /// Compensation plan: per-pulse gamma, fidelities, contrast gain.
    Plan,
    /// Cross-check quadrature averages against Monte Carlo sampling.
    McCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    #[value(name = "fidelity-vs-t", alias = "fidelity_vs_t")]
    FidelityVsT,
    #[value(name = "contrast-vs-t", alias = "contrast_vs_t")]
    ContrastVsT,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }

    let file = cli
        .config
        .as_deref()
        .map(config::ConfigFile::load)
        .transpose()?;
    let overrides = config::Overrides {
        mc_samples: cli.mc_samples,
        seed: cli.seed,
    };
    let resolved = config::resolve(cli.scenario.as_deref(), file.as_ref(), overrides)?;

    let ctx = commands::Ctx {
        resolved,
        format: cli.format,
        out: cli.out.clone(),
        compensated: cli.compensated,
        mc_requested: cli.mc_samples.is_some(),
        explicit_scenario: cli.scenario.is_some() || cli.config.is_some(),
    };

    match cli.command {
        Command::Expansion { t_max, points } => commands::expansion(&ctx, t_max, points),
        Command::Rabi {
            pulse,
            ratio,
            tau_max,
            points,
        } => commands::rabi(&ctx, pulse, ratio, tau_max, points),
        Command::Fringe { points } => commands::fringe(&ctx, points),
        Command::Sweep {
            sweep,
            from,
            to,
            points,
        } => commands::sweep(&ctx, sweep, from, to, points),
        Command::Plan => commands::plan(&ctx),
        Command::McCheck => commands::mc_check(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("mzfringe: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
