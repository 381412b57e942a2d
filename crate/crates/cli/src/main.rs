#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::*;
use crate::error::CliError;

/// Gaussian benchmark capacities, adaptive-receiver simulation and QAM
/// heterodyne information. Results are CSV on stdout (or --out).
#[derive(Debug, Parser)]
#[command(name = "gaussbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coherent, squeezed and Holevo capacities of one channel.
    Capacity(CapacityParams),
    /// C_gauss / C_holevo over an (n_th, n_bar) grid.
    EfficiencyGrid(GridParams),
    /// Water-filling allocation over parallel Gaussian channels.
    Waterfill(WaterfillParams),
    /// Randomized check that entangled inputs never beat separable ones.
    AdditivityTest(AdditivityParams),
    /// Adaptive-receiver mutual information against the Gaussian benchmark.
    Becerra(BecerraParams),
    /// Heterodyne mutual information of QAM constellations.
    QamHeterodyne(HeterodyneParams),
    /// Fast invariant checks of the whole library.
    Selftest(SelftestParams),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Capacity(p) => commands::capacity(resolve(p)?),
        Command::EfficiencyGrid(p) => commands::efficiency_grid(resolve(p)?),
        Command::Waterfill(p) => commands::waterfill(resolve(p)?),
        Command::AdditivityTest(p) => commands::additivity(resolve(p)?),
        Command::Becerra(p) => commands::becerra(resolve(p)?),
        Command::QamHeterodyne(p) => commands::qam_heterodyne(resolve(p)?),
        Command::Selftest(p) => commands::selftest(resolve(p)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gaussbench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
