use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use patchwind::commands::{cmd_run, cmd_sweep, cmd_verify, SweepAxis, VerifyOptions};

#[derive(Parser)]
#[command(name = "patchwind", version, about = "Vortex patch contour dynamics with winding-number diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set t_end=20`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run perturbed-disk experiments across a list of δ (or η) values.
    Sweep {
        config: PathBuf,
        /// Target |Ω_0 △ D| values.
        #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "etas", required_unless_present = "etas")]
        deltas: Vec<f64>,
        /// Perturbation amplitudes η.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        etas: Vec<f64>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the built-in oracle cross-checks.
    Verify {
        /// Lower resolution with widened tolerances.
        #[arg(long)]
        fast: bool,
    },
}

fn init_threads() {
    if let Ok(v) = std::env::var("PATCHWIND_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: could not size thread pool: {e}");
                }
            }
            _ => eprintln!("warning: ignoring PATCHWIND_THREADS={v}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let code = match cli.command {
        Command::Run { config, overrides } => cmd_run(&config, &overrides),
        Command::Sweep { config, deltas, etas, overrides } => {
            let axis = if etas.is_empty() { SweepAxis::Deltas(deltas) } else { SweepAxis::Etas(etas) };
            cmd_sweep(&config, &axis, &overrides)
        }
        Command::Verify { fast } => cmd_verify(&VerifyOptions { fast, ..VerifyOptions::default() }),
    };
    ExitCode::from(code as u8)
}
