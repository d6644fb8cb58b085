//! `gapcast optimize` — fit the per-season rating parameter schedule.

use std::path::PathBuf;

use clap::Args;
use gapcast::params::schedule_params;
use gapcast::Result;

use super::{create_file, load_store, parse_stats, schedule_path};

#[derive(Args)]
pub struct OptimizeArgs {
    /// Pipeline output directory holding the store; the schedule lands in
    /// <out>/params/schedule.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated statistics to fit, or `all`.
    #[arg(long, default_value = "all")]
    pub stats: String,
}

pub fn run(args: &OptimizeArgs) -> Result<()> {
    let stats = parse_stats(&args.stats)?;
    let store = load_store(&args.out)?;
    let schedule = schedule_params(&store, &stats)?;

    let path = schedule_path(&args.out);
    schedule.write_csv(create_file(&path)?)?;
    log::info!("wrote {}", path.display());

    println!(
        "{:<18} {:<8} {:>9} {:>7} {:>7} {:>12} {:>9}",
        "statistic", "season", "lambda", "phi1", "phi2", "sse", "matches"
    );
    for (stat, season, entry) in schedule.iter() {
        println!(
            "{:<18} {:<8} {:>9.5} {:>7.4} {:>7.4} {:>12.2} {:>9}",
            stat.label(),
            season,
            entry.params.lambda,
            entry.params.phi1,
            entry.params.phi2,
            entry.sse,
            entry.n_matches
        );
    }
    Ok(())
}
