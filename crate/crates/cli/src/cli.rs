//! Argument parsing and dispatch.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mutsel_core::bayes::{RopeInterval, DEFAULT_POSTERIOR_SAMPLES};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::report::{cmd_report, parse_rope, ReportOptions};
use crate::run::{cmd_run, RunOptions};
use crate::sweep::{cmd_sweep_features, parse_k_list, SweepOptions};

#[derive(Debug, Clone)]
pub struct KList(pub Vec<usize>);

fn parse_k_arg(s: &str) -> std::result::Result<KList, String> {
    parse_k_list(s).map(KList)
}

#[derive(Debug, Parser)]
#[command(name = "mutsel", version, about = "Mutation validation vs k-fold CV model selection experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the paired nested-CV comparison for every configured cell.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides both the config seed and MUTSEL_SEED.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Bayesian analysis of result files or run directories.
    Report {
        #[arg(long, value_parser = parse_rope, default_value = "-0.025,0.025", allow_hyphen_values = true)]
        rope: RopeInterval,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_POSTERIOR_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(required = true)]
        results: Vec<PathBuf>,
    },
    /// Repeat the comparison on the top-K ANOVA features for each K.
    SweepFeatures {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated feature counts, e.g. `5,50,500`.
        #[arg(long, value_parser = parse_k_arg)]
        k: KList,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_rope, default_value = "-0.025,0.025", allow_hyphen_values = true)]
        rope: RopeInterval,
    },
}

fn partial(manifest: RunManifest) -> Result<()> {
    if manifest.is_partial() {
        Err(CliError::Partial {
            failed: manifest.failed_cells.len(),
            total: manifest.n_cells,
        })
    } else {
        Ok(())
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, workers, seed } => partial(cmd_run(&RunOptions { config, out, workers, seed })?),
        Command::Report {
            rope,
            out,
            samples,
            seed,
            results,
        } => cmd_report(&ReportOptions {
            inputs: results,
            rope,
            out,
            n_samples: samples,
            seed,
        })
        .map(|_| ()),
        Command::SweepFeatures {
            config,
            k,
            out,
            workers,
            seed,
            rope,
        } => partial(cmd_sweep_features(&SweepOptions {
            config,
            k_list: k.0,
            out,
            workers,
            seed,
            rope,
        })?),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mutsel: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
