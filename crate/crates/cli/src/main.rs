//! `qnd`: regenerate detection, spectroscopy and fidelity data as CSV/JSON.

mod commands;
mod config;
mod envelope;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_override, RunConfig};

#[derive(Parser)]
#[command(name = "qnd", version, about = "QND state detection and force spectroscopy of a trapped molecular ion")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, env = "QND_CONFIG")]
    config: Option<PathBuf>,
    /// RNG seed; overrides the `seed` config key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV outputs.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Config override, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stark shift of the bright state and the worst other state over a frequency grid.
    Spectrum(commands::SpectrumArgs),
    /// Sideband Rabi signal for a coherent state.
    Rabi(commands::RabiArgs),
    /// Threshold, detection errors and fidelities of the configured model.
    Discriminate(commands::DiscriminateArgs),
    /// Simulated sequence of detection attempts.
    Timetrace(commands::TimetraceArgs),
    /// Fit measured data.
    Fit(FitArgs),
    /// Scattering-limited number of detection cycles.
    Budget(commands::BudgetArgs),
}

#[derive(Args)]
struct FitArgs {
    #[command(subcommand)]
    kind: FitKind,
}

#[derive(Subcommand)]
enum FitKind {
    /// ⟨n⟩, δ and T₂ from a sideband Rabi trace.
    Rabi(commands::FitRabiArgs),
    /// Stark shift from a Rabi trace through a calibration.
    Stark(commands::FitStarkArgs),
    /// Line center from Stark points.
    Line(commands::FitLineArgs),
    /// Einstein A from Stark points.
    Avib(commands::FitAvibArgs),
}

/// Error reported on stderr with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<qnd_core::Error> for CliError {
    fn from(e: qnd_core::Error) -> Self {
        CliError {
            code: if e.is_numerical() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides, cli.seed)?;
    let ctx = commands::Context {
        config,
        out: cli.out,
    };
    let envelope = match cli.command {
        Command::Spectrum(a) => commands::spectrum(&ctx, &a),
        Command::Rabi(a) => commands::rabi(&ctx, &a),
        Command::Discriminate(a) => commands::discriminate(&ctx, &a),
        Command::Timetrace(a) => commands::timetrace(&ctx, &a),
        Command::Fit(f) => match f.kind {
            FitKind::Rabi(a) => commands::fit_rabi(&ctx, &a),
            FitKind::Stark(a) => commands::fit_stark(&ctx, &a),
            FitKind::Line(a) => commands::fit_line(&ctx, &a),
            FitKind::Avib(a) => commands::fit_avib(&ctx, &a),
        },
        Command::Budget(a) => commands::budget(&ctx, &a),
    }?;
    let json = serde_json::to_string_pretty(&envelope).map_err(|e| CliError::input(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
