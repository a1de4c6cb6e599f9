//! Command-line front end: `bvlsc <analyze|liminf|decompose|recession> <config>`.

use crate::error::{Error, Result};
use crate::report::write_artifacts;
use crate::verdict::{run, Mode, Scenario};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXECUTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bvlsc", version, about = "Weak* lower semicontinuity checks for linear-growth functionals on BV")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Overrides both the domain and the half-ball mesh size.
    #[arg(long, global = true)]
    pub h: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full verdict plus the extras toggled in the config.
    Analyze { config: PathBuf },
    /// Empirical liminf along the configured sequences.
    Liminf { config: PathBuf },
    /// Local decomposition of the configured sequence.
    Decompose { config: PathBuf },
    /// Recession estimates and the deviation modulus.
    Recession { config: PathBuf },
}

impl Command {
    fn parts(&self) -> (Mode, &PathBuf) {
        match self {
            Command::Analyze { config } => (Mode::Analyze, config),
            Command::Liminf { config } => (Mode::Liminf, config),
            Command::Decompose { config } => (Mode::Decompose, config),
            Command::Recession { config } => (Mode::Recession, config),
        }
    }
}

/// Loads the scenario named by the command and applies the command-line overrides.
pub fn load(cli: &Cli) -> Result<Scenario> {
    let (_, path) = cli.command.parts();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut s = Scenario::from_json(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(h) = cli.h {
        s.h = h;
        s.qslb.h = h;
    }
    s.validate()?;
    Ok(s)
}

/// Runs the CLI and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let scenario = match load(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let (mode, _) = cli.command.parts();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_EXECUTION;
        }
    };
    let verdict = match pool.install(|| run(&scenario, mode)) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_EXECUTION;
        }
    };
    match write_artifacts(&verdict, &cli.out_dir) {
        Ok(_) => {
            let overall = serde_json::to_string(&verdict.overall).unwrap_or_default();
            println!(
                "{}: {} ({} violations, {} errors) -> {}",
                verdict.name,
                overall.trim_matches('"'),
                verdict.violations.len(),
                verdict.errors.len(),
                cli.out_dir.join("report.json").display()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_EXECUTION
        }
    }
}
