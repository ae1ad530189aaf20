//! Command-line front end for wavelab: scenario parsing, the subcommands and
//! their deterministic output files.

pub mod commands;
pub mod error;
pub mod initial;
pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

pub use error::{CliError, CliResult};
use output::Staging;
use scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eigensolve,
    Evolve,
    Dispersion,
    Residual,
    Calibrate,
    Kinematics,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigensolve => "eigensolve",
            Command::Evolve => "evolve",
            Command::Dispersion => "dispersion",
            Command::Residual => "residual",
            Command::Calibrate => "calibrate",
            Command::Kinematics => "kinematics",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Overrides the scenario's `seed`.
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct RunReport {
    /// Deterministic outputs, in the order they were written.
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

/// Loads `path`, runs `command` and commits its outputs to `opts.out_dir`.
/// Nothing is written unless the whole command succeeds.
pub fn run(command: Command, path: &Path, opts: &RunOptions) -> CliResult<RunReport> {
    let started = Instant::now();
    let scenario = Scenario::load(path)?;
    let seed = opts.seed.or(scenario.raw.seed).unwrap_or(0);
    let mut staging = Staging::new(&opts.out_dir)?;
    let summary = {
        let mut ctx = commands::Ctx {
            scenario: &scenario,
            staging: &mut staging,
            seed,
        };
        match command {
            Command::Eigensolve => commands::eigensolve(&mut ctx),
            Command::Evolve => commands::evolve_cmd(&mut ctx),
            Command::Dispersion => commands::dispersion_cmd(&mut ctx),
            Command::Residual => commands::residual_cmd(&mut ctx),
            Command::Calibrate => commands::calibrate_cmd(&mut ctx),
            Command::Kinematics => commands::kinematics_cmd(&mut ctx),
            Command::Compare => commands::compare_cmd(&mut ctx),
        }?
    };
    let files = staging.commit()?;

    // run metadata varies between runs, so it lives apart from the outputs
    let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "scenario": scenario.name(),
        "scenario_path": path.display().to_string(),
        "seed": seed,
        "unix_time": unix,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
        "files": names,
    });
    let mut meta_stage = Staging::new(&opts.out_dir)?;
    let meta_bytes = serde_json::to_string_pretty(&meta).expect("JSON values always serialise") + "\n";
    meta_stage.stage(&format!("{}_{}.meta.json", scenario.name(), command.name()), meta_bytes.as_bytes())?;
    meta_stage.commit()?;

    Ok(RunReport { files, summary })
}
