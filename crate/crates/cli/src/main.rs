//! `tealeaf` — fit, segment, evaluate, and simulate from the command line.
//!
//! Exit status: 0 on success, 2 for unparsable input, 3 when the fitter finds
//! no admissible parameters, 4 for I/O failures, 1 for anything else.

mod commands;
mod error;
mod fit_config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tealeaf_core::{FitMode, DEFAULT_SEED};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "tealeaf",
    version,
    about = "Tender tea leaf identification and plucking simulation"
)]
struct Cli {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Seed for every stochastic component; printed in report headers.
    /// For `simulate`, overrides the scenario's own seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the fitter and campaign (0 = one per core).
    /// Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit per-image segmentation parameters from annotated sample boxes.
    ///
    /// Writes fit_report.txt and params.txt to the output directory.
    Fit {
        /// Annotation file: `<image_id> <leaf|background> <x0> <y0> <w> <h>` per line.
        annotations: PathBuf,
        /// Directory holding `<image_id>.ppm` for every annotated image.
        images: PathBuf,
        /// `key = value` grid overrides (coeff_min, coeff_step, t_step, mode, ...).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Grid search mode; overrides the config file.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<FitMode>,
    },
    /// Binarize images with a params file (`x y z T`); writes `<stem>.pgm` masks.
    Segment {
        params: PathBuf,
        #[arg(required = true)]
        images: Vec<PathBuf>,
    },
    /// Score masks against truth boxes; writes eval_report.txt.
    ///
    /// Truth lines are `<image_id> <x0> <y0> <w> <h>`; a mask is matched to
    /// its truth by file stem.
    Evaluate {
        truth: PathBuf,
        #[arg(required = true)]
        masks: Vec<PathBuf>,
        /// Smallest region, in pixels, that counts.
        #[arg(long, default_value_t = 50)]
        min_area: usize,
    },
    /// Run a plucking campaign; writes campaign_report.txt.
    Simulate {
        scenario: PathBuf,
        /// Also write traces/trial_NNNN.txt for every trial.
        #[arg(long)]
        trace: bool,
    },
}

fn parse_mode(s: &str) -> Result<FitMode, String> {
    s.parse().map_err(|e: tealeaf_core::FitError| e.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
    let seed = cli.seed;
    let out = cli.out;
    pool.install(|| match cli.command {
        Command::Fit {
            annotations,
            images,
            config,
            mode,
        } => commands::fit(
            &annotations,
            &images,
            config.as_deref(),
            mode,
            &out,
            seed.unwrap_or(DEFAULT_SEED),
        ),
        Command::Segment { params, images } => commands::segment(&params, &images, &out),
        Command::Evaluate {
            truth,
            masks,
            min_area,
        } => commands::evaluate(&truth, &masks, min_area, &out, seed.unwrap_or(DEFAULT_SEED)),
        Command::Simulate { scenario, trace } => commands::simulate(&scenario, seed, trace, &out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tealeaf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
