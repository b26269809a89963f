//! `spindecouple` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 infeasible synthesis,
//! 4 numerical failure.

mod groups;
mod majorana;
mod seq;
mod sim;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "spindecouple", version, about = "Dynamical decoupling from point-group symmetry")]
struct Cli {
    /// RNG seed for sampling and randomized searches.
    #[arg(long, global = true, env = "SPINDECOUPLE_SEED")]
    seed: Option<u64>,
    /// Worker thread cap for sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect point groups and their factorizations.
    #[command(subcommand)]
    Groups(groups::GroupsCmd),
    /// Build, synthesize, parse and check pulse sequences.
    #[command(subcommand)]
    Seq(seq::SeqCmd),
    /// Propagator sweeps and slope fits.
    #[command(subcommand)]
    Sim(sim::SimCmd),
    /// Majorana constellations and symmetry detection.
    #[command(subcommand)]
    Majorana(majorana::MajoranaCmd),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Infeasible(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Infeasible(m) | CliError::Numerical(m) => m,
        }
    }
}

pub type CliResult = Result<(), CliError>;

pub fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<spindecouple::simulate::SimError> for CliError {
    fn from(e: spindecouple::simulate::SimError) -> Self {
        use spindecouple::simulate::SimError::*;
        match e {
            NotUnitary(_) | NonFinite => CliError::Numerical(e.to_string()),
            Algebra(spindecouple::algebra::AlgebraError::NonFinite) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Global options every subcommand may need.
pub struct Ctx {
    pub seed: Option<u64>,
    pub threads: usize,
}

impl Ctx {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// Writes `text` to `path` (creating parent directories) or to stdout.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

pub fn write_file(p: &Path, text: &str) -> CliResult {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())))
}

pub fn read_file(p: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
}

pub fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let ctx = Ctx { seed: cli.seed, threads: cli.threads };
    let result = match cli.command {
        Command::Groups(c) => groups::run(c),
        Command::Seq(c) => seq::run(c, &ctx),
        Command::Sim(c) => sim::run(c, &ctx),
        Command::Majorana(c) => majorana::run(c, &ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
