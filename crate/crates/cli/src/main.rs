use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavelab_cli::{run, Command, RunOptions};

#[derive(Parser)]
#[command(name = "wavelab", version, about = "Wave-equation families on 1-D grids")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Directory for output files
    #[arg(long, global = true, env = "WAVELAB_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Seed for randomised sampling (overrides the scenario seed)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Do not print the JSON summary
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lowest stationary states
    Eigensolve { scenario: PathBuf },
    /// Time evolution with snapshots and diagnostics
    Evolve { scenario: PathBuf },
    /// Dispersion relation and plane-wave residuals
    Dispersion { scenario: PathBuf },
    /// Residual of an analytic candidate
    Residual { scenario: PathBuf },
    /// Calibrated constants against their printed forms
    Calibrate { scenario: PathBuf },
    /// Random checks of the charged-particle kinematics
    Kinematics { scenario: PathBuf },
    /// Two evolutions side by side
    Compare { scenario: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, path) = match cli.command {
        Cmd::Eigensolve { scenario } => (Command::Eigensolve, scenario),
        Cmd::Evolve { scenario } => (Command::Evolve, scenario),
        Cmd::Dispersion { scenario } => (Command::Dispersion, scenario),
        Cmd::Residual { scenario } => (Command::Residual, scenario),
        Cmd::Calibrate { scenario } => (Command::Calibrate, scenario),
        Cmd::Kinematics { scenario } => (Command::Kinematics, scenario),
        Cmd::Compare { scenario } => (Command::Compare, scenario),
    };
    let opts = RunOptions {
        out_dir: cli.out_dir,
        seed: cli.seed,
    };
    match run(command, &path, &opts) {
        Ok(report) => {
            if !cli.quiet {
                println!("{}", serde_json::to_string_pretty(&report.summary).unwrap_or_default());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
