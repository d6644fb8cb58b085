//! `gapcast` — file-based forecasting pipeline for football match
//! statistics, outcome models and betting backtests.
//!
//! Stages communicate exclusively through files under the output
//! directory: `ingest` builds the canonical match store, `optimize` fits
//! the rating parameter schedule, and `aic`, `backtest` and `evaluate`
//! produce reports from those two artifacts. `synth` generates a
//! self-contained synthetic dataset in the same store format, so every
//! later stage can be exercised without real data.
//!
//! Exit codes: 0 success, 2 invalid input or missing files, 3 malformed
//! data, 4 computation failure (not enough data or a fit that did not
//! converge).

mod cmd;

use clap::{Parser, Subcommand};
use gapcast::Error;

#[derive(Parser)]
#[command(
    name = "gapcast",
    version,
    about = "Forecast football match statistics and outcomes, and backtest betting strategies",
    after_help = "Exit codes: 0 success, 2 invalid input, 3 malformed data, 4 computation failure."
)]
struct Cli {
    /// Worker threads for parallel sections; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw league CSVs into the canonical match store.
    Ingest(cmd::ingest::IngestArgs),
    /// Fit the per-season rating parameter schedule from the store.
    Optimize(cmd::optimize::OptimizeArgs),
    /// Rank predictor combinations by AIC, with and without odds.
    Aic(cmd::aic::AicArgs),
    /// Walk-forward betting backtest for chosen combinations.
    Backtest(cmd::backtest::BacktestArgs),
    /// Statistic-prediction error report against the league-mean baseline.
    Evaluate(cmd::evaluate::EvaluateArgs),
    /// Generate a synthetic multi-league dataset with known ground truth.
    Synth(cmd::synth::SynthArgs),
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::InvalidInput(_) => 2,
        Error::Format(_) => 3,
        Error::NotEnoughData(_) | Error::Fit(_) => 4,
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Ingest(args) => cmd::ingest::run(&args),
        Command::Optimize(args) => cmd::optimize::run(&args),
        Command::Aic(args) => cmd::aic::run(&args),
        Command::Backtest(args) => cmd::backtest::run(&args),
        Command::Evaluate(args) => cmd::evaluate::run(&args),
        Command::Synth(args) => cmd::synth::run(&args),
    };
    if let Err(err) = result {
        log::error!("{err}");
        std::process::exit(exit_code(&err));
    }
}
