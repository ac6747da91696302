// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pagani::integrands::lookup;
use pagani::reference::DEFAULT_MAX_EVALS;
use pagani_cli::commands::{self, RunOptions, K_MAX_LIMIT};
use pagani_cli::plot::write_plots;
use pagani_cli::record::{read_records, write_records};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "pagani", version, about = "Breadth-first adaptive cubature: runs, sweeps, comparisons and plots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DriverArgs {
    /// Absolute error tolerance.
    #[arg(long, default_value_t = 1e-20)]
    tau_abs: f64,
    /// Largest number of live regions.
    #[arg(long, default_value_t = 1 << 22)]
    max_regions: usize,
    /// Iteration cap.
    #[arg(long, default_value_t = 100)]
    it_max: usize,
    /// Disable relative-error filtering (always off for oscillatory integrands).
    #[arg(long)]
    no_rel_filter: bool,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
}

impl DriverArgs {
    fn options(&self) -> RunOptions {
        RunOptions { tau_abs: self.tau_abs, max_regions: self.max_regions, it_max: self.it_max, rel_filter: !self.no_rel_filter }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one suite integrand and print a CSV record.
    Integrate {
        /// Integrand id, f1..f8.
        id: String,
        dim: usize,
        /// Relative tolerance (same as --tau-rel).
        tau: Option<f64>,
        #[arg(long)]
        tau_rel: Option<f64>,
        #[command(flatten)]
        driver: DriverArgs,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep tau_rel = 1e-3·5^-k, k = 0..=k_max, over a set of integrands.
    Bench {
        /// Comma-separated id:dim list, e.g. "f4:5,f6:6"; the whole suite if omitted.
        #[arg(long)]
        subset: Option<String>,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        #[command(flatten)]
        driver: DriverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the breadth-first and the sequential reference driver side by side.
    Compare {
        #[arg(long)]
        subset: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        tau_rel: f64,
        /// Evaluation cap for the reference driver.
        #[arg(long, default_value_t = DEFAULT_MAX_EVALS)]
        max_evals: u64,
        #[command(flatten)]
        driver: DriverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw accuracy and region-count charts from a bench CSV.
    Plot {
        csv: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn usage(msg: impl ToString) -> Failure {
    Failure::Usage(msg.to_string())
}

fn runtime(msg: impl ToString) -> Failure {
    Failure::Runtime(msg.to_string())
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(File::create(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn with_threads<T>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, Failure>
where
    T: Send,
{
    match threads {
        None => Ok(job()),
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(runtime)?;
            Ok(pool.install(job))
        }
    }
}

fn subset_specs(subset: &Option<String>) -> Result<Vec<pagani::integrands::IntegrandSpec>, Failure> {
    match subset {
        Some(s) => commands::parse_subset(s).map_err(usage),
        None => Ok(pagani::integrands::suite()),
    }
}

/// Returns whether the run met its goal.
fn run(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Integrate { id, dim, tau, tau_rel, driver, out } => {
            let tau = match (tau, tau_rel) {
                (Some(a), Some(b)) if a != b => return Err(usage("conflicting tolerances given positionally and with --tau-rel")),
                (a, b) => a.or(b).unwrap_or(1e-3),
            };
            if !(tau > 0.0) {
                return Err(usage("tau_rel must be positive"));
            }
            let id = id.parse().map_err(usage)?;
            let spec = lookup(id, dim).map_err(usage)?;
            let opts = driver.options();
            let record = with_threads(driver.threads, || commands::run_pagani(&spec, tau, &opts))?.map_err(usage)?;
            write_records(output(&out)?, std::slice::from_ref(&record)).map_err(runtime)?;
            Ok(record.passes())
        }
        Command::Bench { subset, k_max, driver, out } => {
            if k_max > K_MAX_LIMIT {
                return Err(usage(format!("--k-max must be at most {K_MAX_LIMIT}")));
            }
            let specs = subset_specs(&subset)?;
            let opts = driver.options();
            let records = with_threads(driver.threads, || commands::bench(&specs, k_max, &opts))?.map_err(usage)?;
            write_records(output(&out)?, &records).map_err(runtime)?;
            Ok(true)
        }
        Command::Compare { subset, tau_rel, max_evals, driver, out } => {
            if !(tau_rel > 0.0) {
                return Err(usage("tau_rel must be positive"));
            }
            let specs = subset_specs(&subset)?;
            let opts = driver.options();
            let pairs = with_threads(driver.threads, || commands::compare(&specs, tau_rel, &opts, max_evals))?.map_err(usage)?;
            commands::write_compare(output(&out)?, &pairs).map_err(runtime)?;
            Ok(true)
        }
        Command::Plot { csv, out } => {
            let file = File::open(&csv).map_err(|e| usage(format!("{}: {e}", csv.display())))?;
            let records = read_records(file).map_err(|e| usage(format!("malformed CSV: {e}")))?;
            if records.is_empty() {
                return Err(usage("CSV has no rows to plot"));
            }
            for path in write_plots(&records, &out).map_err(runtime)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
