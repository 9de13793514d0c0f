//! Command-line front end for `collective-dfs`.

pub mod commands;
pub mod error;
pub mod model;
pub mod states;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use error::{CliError, CliResult};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "COLLECTIVE_DFS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "collective-dfs", version, about = "Decoherence-free subspaces under collective decoherence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Efficiency and decoherence-free fraction against r = k/n.
    #[value(name = "1a")]
    Fig1a,
    /// Their product against r.
    #[value(name = "1b")]
    Fig1b,
    /// DFS to leakage-target ratio against j_tot.
    #[value(name = "2")]
    Fig2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split an n-qubit register into su(2) towers.
    Decompose {
        /// Number of qubits (at most 8).
        #[arg(long)]
        n: usize,
    },
    /// Find the subspace that is decoherence-free and invariant under H_S.
    Cdfs {
        /// JSON model file.
        #[arg(long)]
        model: PathBuf,
        /// Excitation sector; every sector when omitted.
        #[arg(long)]
        k: Option<usize>,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Integrate the master equation from a pure state.
    Evolve {
        /// JSON model file.
        #[arg(long)]
        model: PathBuf,
        /// State name, bitstring, or JSON amplitude file.
        #[arg(long)]
        state: String,
        /// Final time.
        #[arg(long)]
        t: f64,
        /// Time step; defaults to 0.02 over the generator's spectral scale.
        #[arg(long)]
        dt: Option<f64>,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Drop the dissipator and keep only H_S.
        #[arg(long)]
        no_dissipator: bool,
    },
    /// Emit the data series of one figure as CSV.
    Metrics {
        #[arg(long, value_enum)]
        fig: Figure,
        /// Register size for figure 2.
        #[arg(long, default_value_t = 500)]
        n: usize,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the four-qubit two-excitation encoding for given couplings.
    Encode4 {
        /// Model file with n = 4, or a bare coupling spec.
        #[arg(long)]
        b: PathBuf,
        /// JSON output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write fig1.csv, fig2.csv and fig2_series.csv into a directory.
    ReproduceFigures {
        #[arg(long)]
        out_dir: PathBuf,
        /// Largest register in the figure 2 sweep.
        #[arg(long, default_value_t = 500)]
        max_n: usize,
    },
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Decompose { n } => commands::decompose(n, stdout),
        Command::Cdfs { model, k, json } => commands::cdfs_report(&model, k, json, stdout),
        Command::Evolve { model, state, t, dt, out, no_dissipator } => {
            let opts = commands::EvolveOptions { model, state, t, dt, out, no_dissipator };
            commands::evolve_run(&opts, stdout)
        }
        Command::Metrics { fig, n, out } => commands::metrics(fig, n, out.as_deref(), stdout),
        Command::Encode4 { b, out } => commands::encode4(&b, out.as_deref(), stdout),
        Command::ReproduceFigures { out_dir, max_n } => commands::reproduce_figures(&out_dir, max_n, stdout),
    }
}

/// Size the global worker pool from [`THREADS_ENV`], if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot size thread pool: {e}")))
}
