//! Runs scenario files: builds the space and sets, executes the command and
//! writes `report.json` plus any tables into the output directory.
//!
//! Exit codes: 0 success, 1 unreadable or invalid scenario, 2 violated
//! preconditions, 3 a certification performed by the command failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod run;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Schema(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] geoprox::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) | CliError::Io { .. } => 1,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "geoprox", version, about = "Run a geoprox scenario file")]
struct Args {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for report.json and tables (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Root seed; overrides the scenario's.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Relative well-posedness tolerance; overrides the scenario's.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn execute(args: &Args) -> Result<Option<String>, CliError> {
    let text = std::fs::read_to_string(&args.scenario).map_err(|source| CliError::Io {
        path: args.scenario.clone(),
        source,
    })?;
    let mut sc = scenario::parse(&text)?;
    if let Some(tol) = args.tolerance {
        if !(tol > 0.0) {
            return Err(CliError::Schema(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        sc.profile.tau_rel = tol;
        sc.profile.tau_wp = None;
    }
    let seed = args.seed.or(sc.seed);
    log::info!("running {} (seed {seed:?})", sc.command.name());
    let artifacts = run::run(&sc, seed)?;

    std::fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
        path: args.out.clone(),
        source,
    })?;
    let report = json!({
        "version": scenario::SCHEMA_VERSION,
        "command": sc.command.name(),
        "seed": seed,
        "passed": artifacts.check_failed.is_none(),
        "result": artifacts.report,
    });
    let mut body = serde_json::to_string_pretty(&report).expect("reports serialize");
    body.push('\n');
    write(&args.out.join("report.json"), &body)?;
    for (name, contents) in &artifacts.files {
        write(&args.out.join(name), contents)?;
    }
    Ok(artifacts.check_failed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&args) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("check failed: {failure}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
