use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod svg;

#[derive(Debug, Parser)]
#[command(
    name = "infoconv",
    version,
    about = "Synergy bias of temporal mutual information across scales"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Gaussian,
    Deterministic,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputArg {
    /// Stationary distribution (largest attractor) for TPMs, induced
    /// distribution for networks.
    Stationary,
    Uniform,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Micro and macro logic gates: temporal MI, synergy bias and PI spectra.
    LogicGates {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Expand random macroscales into meso/microscales and track synergy bias.
    Expansion {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        n_systems: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Gaussian)]
        kind: KindArg,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        levels: u8,
        #[arg(long, default_value_t = 0)]
        split_element: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Also render the scatter plot as SVG.
        #[arg(long)]
        svg: bool,
    },
    /// Effective information of a TPM and of its coarse-graining.
    EiScan {
        #[arg(long)]
        tpm: PathBuf,
        /// JSON array mapping each micro state to a macro state.
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose the temporal MI of a TPM or network file.
    Pid {
        #[arg(long, conflicts_with = "network", required_unless_present = "network")]
        tpm: Option<PathBuf>,
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = InputArg::Stationary)]
        input: InputArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::LogicGates { out, format } => commands::logic_gates(&out, format),
        Command::Expansion {
            seed,
            n_systems,
            kind,
            levels,
            split_element,
            out,
            format,
            svg,
        } => commands::expansion(&commands::ExpansionArgs {
            seed,
            n_systems,
            kind,
            levels: levels as usize,
            split_element,
            out,
            format,
            svg,
        }),
        Command::EiScan {
            tpm,
            partition,
            out,
        } => commands::ei_scan(&tpm, &partition, out.as_deref()),
        Command::Pid {
            tpm,
            network,
            input,
            out,
        } => commands::pid(tpm.as_deref(), network.as_deref(), input, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
