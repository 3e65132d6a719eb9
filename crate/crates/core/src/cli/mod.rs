//! Command-line front end: `run <scenario.json>` and `verify <suite>`.

pub mod corpus;
pub mod scenario;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use scenario::{run_config, run_scenario, Outcome, Pipeline, RunFlags, RunResult, ScenarioConfig, Tolerances};
pub use verify::{bundled_action, bundled_scenario, run_suite, Check, Suite};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "tukia", version, about = "Conjugating almost-similarity actions to similarity actions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file and write report.json and trace.csv.
    Run {
        file: PathBuf,
        /// Residual target (the defect threshold becomes twice this).
        #[arg(long)]
        tol: Option<f64>,
        /// Drop Følner stages with more words than this.
        #[arg(long)]
        max_words: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 or absent: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (default: the scenario's `output`, else out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification battery and print a pass/fail table.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_UNCERTIFIED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Json(_) => EXIT_INPUT,
        _ => EXIT_UNCERTIFIED,
    }
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { file, tol, max_words, seed, threads, out } => {
            let flags = RunFlags { tol, max_words, seed, threads, out };
            match run_scenario(&file, &flags) {
                Ok(r) => {
                    println!("scenario {}: {}", file.display(), if r.certified { "CERTIFIED" } else { "NOT CERTIFIED" });
                    for line in &r.summary {
                        println!("  {line}");
                    }
                    println!("  wrote {}", r.out_dir.join("report.json").display());
                    println!("  wrote {}", r.out_dir.join("trace.csv").display());
                    if r.certified {
                        EXIT_CERTIFIED
                    } else {
                        EXIT_UNCERTIFIED
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    error_code(&e)
                }
            }
        }
        Command::Verify { suite, seed } => match run_suite(suite, seed) {
            Ok(checks) => {
                let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
                for c in &checks {
                    println!("{:<width$}  {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
                }
                let failed = checks.iter().filter(|c| !c.passed).count();
                println!("{} checks, {failed} failed", checks.len());
                if failed == 0 {
                    EXIT_CERTIFIED
                } else {
                    EXIT_UNCERTIFIED
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                error_code(&e)
            }
        },
    }
}
