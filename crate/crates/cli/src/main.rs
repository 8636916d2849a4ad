use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

use cezero_cli::config::RunConfig;
use cezero_cli::runner;

#[derive(Parser)]
#[command(
    name = "cezero",
    version,
    about = "Bayesian cost-effectiveness analysis for two-arm trials with structural zero costs"
)]
struct Cli {
    /// TOML configuration file; omitted sections fall back to the case-study defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of MCMC chains (overrides the config).
    #[arg(long, global = true)]
    chains: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "cezero_out")]
    out: PathBuf,

    /// Worker threads for chain and sensitivity-cell parallelism
    /// (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model and write draws, summaries, diagnostics and the model card.
    Fit {
        /// Dataset CSV with columns arm,eff,cost[,x1..xJ].
        #[arg(long)]
        data: PathBuf,
    },
    /// Post-process a draws file into EIB/CEAC/EVPI curves and the CE plane.
    Econ {
        /// draws.csv produced by `fit`.
        #[arg(long)]
        draws: PathBuf,
        /// Also emit ce_plane.svg and ceac.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Refit over the W grid and tabulate the population mean cost.
    Sens {
        #[arg(long)]
        data: PathBuf,
    },
    /// Draw a synthetic dataset from the configured truth parameters.
    Simulate {
        /// Records per arm (overrides the config).
        #[arg(long)]
        n: Option<usize>,
        /// File name inside the output directory.
        #[arg(long, default_value = "simulated.csv")]
        file: String,
    },
    /// Recompute summary and diagnostics tables from a draws file.
    Summary {
        #[arg(long)]
        draws: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();

    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }

    let mut rc = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        rc.mcmc.seed = seed;
    }
    if let Some(chains) = cli.chains {
        rc.mcmc.n_chains = chains;
    }

    match &cli.command {
        Command::Fit { data } => runner::run_fit(&rc, data, &cli.out),
        Command::Econ { draws, svg } => {
            if *svg {
                rc.report.svg = true;
            }
            runner::run_econ(&rc, draws, &cli.out)
        }
        Command::Sens { data } => runner::run_sens(&rc, data, &cli.out),
        Command::Simulate { n, file } => {
            if let Some(n) = n {
                rc.n_per_arm = *n;
            }
            runner::run_simulate(&rc, &cli.out, file).map(|_| ())
        }
        Command::Summary { draws } => runner::run_summary(&rc, draws, &cli.out),
    }
}
