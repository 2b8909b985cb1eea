use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eepnlab::harness::{
    emit, emit_theory, run_sweep, selftest, theory_table, write_results, write_theory, Format,
    Preset, SweepConfig,
};
use eepnlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "eepnlab",
    version,
    about = "Equalization-enhanced phase noise simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep.
    Run {
        #[command(flatten)]
        input: Input,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Master seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Analytic EEPN linewidths and BER floors, no simulation.
    Theory {
        #[command(flatten)]
        input: Input,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Args)]
struct Input {
    /// JSON sweep configuration.
    #[arg(long)]
    config: PathBuf,
    /// Start from a built-in sweep; the config file then only overrides keys.
    #[arg(long)]
    preset: Option<Preset>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

fn stdout_result(r: std::io::Result<()>) -> Result<()> {
    r.map_err(|source| Error::Io {
        path: Path::new("<stdout>").to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { input, jobs, seed } => {
            let mut cfg = SweepConfig::load(&input.config, input.preset)?;
            if let Some(j) = jobs {
                cfg.parallelism = j;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let results = run_sweep(&cfg)?;
            match &input.out {
                Some(path) => emit(&results, input.format, path)?,
                None => stdout_result(write_results(
                    &results,
                    input.format,
                    std::io::stdout().lock(),
                ))?,
            }
        }
        Command::Theory { input } => {
            let cfg = SweepConfig::load(&input.config, input.preset)?;
            let table = theory_table(&cfg)?;
            match &input.out {
                Some(path) => emit_theory(&table, input.format, path)?,
                None => {
                    stdout_result(write_theory(&table, input.format, std::io::stdout().lock()))?
                }
            }
        }
        Command::Selftest => {
            let checks = selftest();
            let mut out = std::io::stdout().lock();
            for c in &checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                stdout_result(writeln!(out, "{status} {}: {}", c.name, c.detail))?;
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("eepnlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
