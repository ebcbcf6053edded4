//! Command-line front end for the quaternionic Hamiltonian simulator.
//!
//! Exit codes: 0 when everything passes, 2 when a diagnostic exceeds its
//! threshold, 1 for any operational failure (including bad usage).

pub mod config;
pub mod inspect;
pub mod run;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qk_core::structure::{BlockDim, Label, Space};
use rayon::prelude::*;

use crate::config::load_config;
use crate::inspect::{dump_matrix, to_csv, verify, DumpTarget};
use crate::run::{run, RunOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_THRESHOLD: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "qk", version, about = "Hamiltonian dynamics on quaternionic phase space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a config and write trajectory, diagnostics and plot files.
    Run(RunArgs),
    /// Check the quaternion relations and metric compatibility.
    Verify {
        #[arg(long, value_parser = parse_block)]
        n: BlockDim,
        #[arg(long, hide = true)]
        corrupt_h: bool,
    },
    /// Print a structure tensor or symplectic matrix as integer CSV.
    Dump {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, value_parser = parse_label)]
        label: Label,
        #[arg(long, value_parser = parse_block)]
        n: BlockDim,
        #[arg(long, value_parser = parse_space, default_value = "tangent")]
        space: Space,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file.
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    pub config: Option<PathBuf>,
    /// Run every `*.json` config in a directory, in parallel.
    #[arg(long, value_name = "DIR")]
    pub batch: Option<PathBuf>,
    /// Multiplier applied to every diagnostic threshold.
    #[arg(long, default_value_t = 1.0, value_parser = parse_scale)]
    pub tolerance_scale: f64,
    /// Probe symplecticity at every step rather than only the first.
    #[arg(long)]
    pub full_sweep: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum What {
    Structure,
    Omega,
}

fn parse_block(s: &str) -> Result<BlockDim, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    BlockDim::new(n).map_err(|e| e.to_string())
}

fn parse_label(s: &str) -> Result<Label, String> {
    s.parse().map_err(|e: qk_core::structure::UnknownLabel| e.to_string())
}

fn parse_space(s: &str) -> Result<Space, String> {
    s.parse().map_err(|e: qk_core::structure::UnknownSpace| e.to_string())
}

fn parse_scale(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_FAILURE
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn execute(cli: Cli) -> u8 {
    match cli.command {
        Command::Run(args) => {
            let options = RunOptions {
                tolerance_scale: args.tolerance_scale,
                full_sweep: args.full_sweep,
            };
            match (&args.config, &args.batch) {
                (Some(path), _) => {
                    let (code, message) = run_one(path, options);
                    if code == EXIT_FAILURE {
                        eprintln!("{message}");
                    } else {
                        print!("{message}");
                    }
                    code
                }
                (None, Some(dir)) => run_batch(dir, options),
                (None, None) => unreachable!("clap requires one of config or --batch"),
            }
        }
        Command::Verify { n, corrupt_h } => {
            let report = verify(n, corrupt_h);
            print!("{}", report.table());
            if report.passed() {
                println!("all residuals 0");
                EXIT_OK
            } else {
                println!("nonzero residuals");
                EXIT_THRESHOLD
            }
        }
        Command::Dump { what, label, n, space } => {
            let target = match what {
                What::Structure => DumpTarget::Structure,
                What::Omega => DumpTarget::Omega,
            };
            print!("{}", to_csv(&dump_matrix(target, label, space, n)));
            EXIT_OK
        }
    }
}

/// Loads and runs one config; returns the exit code and a summary.
fn run_one(path: &Path, options: RunOptions) -> (u8, String) {
    let config = match load_config(path) {
        Ok(c) => c,
        Err(e) => return (EXIT_FAILURE, format!("error: {e}")),
    };
    match run(&config, options) {
        Ok(outcome) => {
            let d = &outcome.document;
            let eom = d.eom_residual_max.map_or("n/a".to_owned(), |r| format!("{r:.3e}"));
            let summary = format!(
                "{}: {}\n  energy drift   {:.3e} (limit {:.1e}) {}\n  eom residual   {eom} (limit {:.1e}) {}\n  \
                 symplecticity  {:.3e} (limit {:.1e}) {}\n  algebra        {} {}\n",
                path.display(),
                if d.passed { "PASS" } else { "FAIL" },
                d.energy_drift_max,
                d.threshold_energy_drift,
                mark(d.energy_ok),
                d.threshold_eom_residual,
                mark(d.eom_ok),
                d.symplecticity_residual,
                d.threshold_symplecticity,
                mark(d.symplecticity_ok),
                d.algebra_fgh
                    .max(d.algebra_f_squared)
                    .max(d.algebra_g_squared)
                    .max(d.algebra_h_squared),
                mark(d.algebra_ok),
            );
            let code = if d.passed { EXIT_OK } else { EXIT_THRESHOLD };
            (code, summary)
        }
        Err(e) => (EXIT_FAILURE, format!("error: {}: {e}", path.display())),
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "EXCEEDED"
    }
}

fn run_batch(dir: &Path, options: RunOptions) -> u8 {
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: cannot read batch directory {}: {e}", dir.display());
            return EXIT_FAILURE;
        }
    };
    let mut configs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    configs.sort();
    if configs.is_empty() {
        eprintln!("error: no .json configs in {}", dir.display());
        return EXIT_FAILURE;
    }
    let results: Vec<(u8, String)> = configs.par_iter().map(|p| run_one(p, options)).collect();
    for (code, message) in &results {
        if *code == EXIT_FAILURE {
            eprintln!("{message}");
        } else {
            print!("{message}");
        }
    }
    let codes = results.iter().map(|(c, _)| *c);
    if codes.clone().any(|c| c == EXIT_FAILURE) {
        EXIT_FAILURE
    } else if codes.into_iter().any(|c| c == EXIT_THRESHOLD) {
        EXIT_THRESHOLD
    } else {
        EXIT_OK
    }
}
