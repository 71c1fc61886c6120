use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cs_emission_cli::config::{Formats, OUT_DIR_ENV};
use cs_emission_cli::{commands, execute, Command, Settings, EXIT_OK, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "cs-emission", version, about = "Spontaneous-emission rates of complex-scaled resonance states")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (flat `section.key = value` file)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output.dir and $CS_EMISSION_OUT_DIR
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated output formats: json, csv
    #[arg(long)]
    format: Option<String>,
    /// Record wall-clock time in the JSON output (breaks byte-identical reruns)
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classified spectrum, continuum rays and wavefunctions
    Spectrum(Common),
    /// Decay-rate and shift breakdown of `initial_state`
    Rates(Common),
    /// Sum rule, θ-independence, Hermitian oracle, cross-grid and cutoff checks
    Validate(Common),
    /// Pole trajectories across the configured θ list
    ScanTheta(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Rates(c) => (Command::Rates, c),
        Cmd::Validate(c) => (Command::Validate, c),
        Cmd::ScanTheta(c) => (Command::ScanTheta, c),
    };
    ExitCode::from(run(command, common) as u8)
}

fn run(command: Command, common: Common) -> i32 {
    let mut settings = match Settings::from_file(&common.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: config: {e}");
            return cs_emission_cli::EXIT_CONFIG;
        }
    };
    settings.resolve_out_dir(common.out, std::env::var(OUT_DIR_ENV).ok());
    if let Some(f) = &common.format {
        match Formats::parse(f) {
            Some(f) => settings.output.formats = f,
            None => {
                eprintln!("error: --format accepts json and/or csv (got `{f}`)");
                return cs_emission_cli::EXIT_CONFIG;
            }
        }
    }
    match execute(command, &settings, common.timing) {
        Ok(outcome) => {
            println!("wrote {}", commands::describe(&outcome.files, &settings.output.dir));
            if outcome.passed {
                EXIT_OK
            } else {
                eprintln!("validation failed; see validate.json");
                EXIT_VALIDATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
