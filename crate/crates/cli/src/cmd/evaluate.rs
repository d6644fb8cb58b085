//! `gapcast evaluate` — statistic-prediction error against the
//! league-mean baseline.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gapcast::eval::{mae_table, write_mae_csv, write_scatter_csv, BaselineMode};
use gapcast::Result;

use super::{create_file, load_schedule, load_store, parse_stats, reports_dir};

#[derive(Clone, Copy, ValueEnum)]
pub enum BaselineArg {
    /// League mean over matches played before each forecast (no lookahead).
    Running,
    /// League mean over the whole sample, matching an in-sample reading
    /// of the baseline.
    Full,
}

impl BaselineArg {
    fn mode(self) -> BaselineMode {
        match self {
            BaselineArg::Running => BaselineMode::Running,
            BaselineArg::Full => BaselineMode::FullSample,
        }
    }
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Pipeline output directory holding the store and schedule.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated statistics to evaluate, or `all`.
    #[arg(long, default_value = "all")]
    pub stats: String,
    /// Baseline the rating predictions are compared against.
    #[arg(long, value_enum, default_value_t = BaselineArg::Running)]
    pub baseline: BaselineArg,
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let stats = parse_stats(&args.stats)?;
    let store = load_store(&args.out)?;
    let schedule = load_schedule(&args.out)?;

    let rows = mae_table(&store, &schedule, &stats, args.baseline.mode())?;
    let mae_path = reports_dir(&args.out).join("mae.csv");
    write_mae_csv(&rows, create_file(&mae_path)?)?;
    log::info!("wrote {}", mae_path.display());

    let scatter_path = reports_dir(&args.out).join("scatter.csv");
    write_scatter_csv(&store, &schedule, &stats, create_file(&scatter_path)?)?;
    log::info!("wrote {}", scatter_path.display());

    println!(
        "{:<18} {:<5} {:>9} {:>10} {:>13}",
        "statistic", "side", "matches", "mae model", "mae baseline"
    );
    for row in &rows {
        println!(
            "{:<18} {:<5} {:>9} {:>10.3} {:>13.3}",
            row.statistic.label(),
            row.side.label(),
            row.n,
            row.mae_model,
            row.mae_baseline
        );
    }
    Ok(())
}
