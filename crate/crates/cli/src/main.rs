//! `mono3d-diag`: evaluation, range-wise evaluation, ground-truth
//! substitution diagnosis, localization-error tables, dataset statistics
//! and loss property checks.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 some images
//! failed to parse (the rest were processed), 3 a loss property check
//! failed.

mod commands;
mod config;
mod dataset;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use commands::{LocErrorArgs, Status};
use config::{DataArgs, Format, RunConfig};
use mono3d::diagnosis::{STANDARD_DEPTHS, STANDARD_SHIFTS};
use mono3d::losses::gradcheck::CheckConfig;

#[derive(Debug, Parser)]
#[command(name = "mono3d-diag", version, about = "Monocular 3D detection metrics and diagnostics")]
struct Cli {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true, env = "MONO3D_DIAG_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// AP40 / AOS over the task × difficulty × threshold grid.
    Eval(DataArgs),
    /// AP40 per depth bucket.
    RangeEval(DataArgs),
    /// Ground-truth substitution table.
    Diagnose(DataArgs),
    /// Localization error induced by a pixel shift of the projected center.
    LocError {
        /// Pixel shift `du,dv`; repeatable.
        #[arg(long = "shift", value_parser = parse_shift)]
        shifts: Vec<(f64, f64)>,
        /// Depths in meters, comma separated.
        #[arg(long = "depth", value_delimiter = ',')]
        depths: Vec<f64>,
        #[arg(long, default_value_t = commands::default_focal())]
        focal: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Center misalignment, depth error and sample weight per depth bucket.
    Stats(DataArgs),
    /// Finite-difference and identity checks of the loss functions.
    LossCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, hide = true)]
        corrupt_gradient: bool,
    },
}

fn parse_shift(s: &str) -> Result<(f64, f64), String> {
    let (du, dv) = s.split_once(',').ok_or_else(|| format!("expected `du,dv`, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(du)?, parse(dv)?))
}

fn run(cli: Cli) -> Result<Status> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Eval(args) => commands::eval(&RunConfig::resolve(&args)?),
        Command::RangeEval(args) => commands::range_eval(&RunConfig::resolve(&args)?),
        Command::Diagnose(args) => commands::diagnose(&RunConfig::resolve(&args)?),
        Command::Stats(args) => commands::stats(&RunConfig::resolve(&args)?),
        Command::LocError {
            shifts,
            depths,
            focal,
            out,
            format,
        } => {
            let shifts = if shifts.is_empty() { STANDARD_SHIFTS.to_vec() } else { shifts };
            let depths = if depths.is_empty() { STANDARD_DEPTHS.to_vec() } else { depths };
            commands::loc_error(&LocErrorArgs {
                shifts: &shifts,
                depths: &depths,
                focal,
                out: out.as_deref(),
                format,
            })
        }
        Command::LossCheck {
            seed,
            trials,
            corrupt_gradient,
        } => commands::loss_check(&CheckConfig {
            seed,
            trials: trials as usize,
            corrupt_gradient,
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::PartialData) => ExitCode::from(2),
        Ok(Status::PropertyFailure) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
