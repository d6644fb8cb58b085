//! `gapcast synth` — synthetic dataset with known ground truth, written
//! in the canonical store format so every other command can run on it.

use std::path::PathBuf;

use clap::Args;
use gapcast::eval::synth::{synth_store, SynthParams};
use gapcast::Result;

use super::{create_file, store_dir, DEFAULT_SEED};

#[derive(Args)]
pub struct SynthArgs {
    /// Pipeline output directory; the store lands in <out>/store and the
    /// generating truth in <out>/truth.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of league tiers.
    #[arg(long, default_value_t = 3)]
    pub num_leagues: usize,
    /// Teams per league; even, at least 4.
    #[arg(long, default_value_t = 10)]
    pub teams: usize,
    /// Seasons to simulate.
    #[arg(long, default_value_t = 6)]
    pub seasons: usize,
    /// Calendar year the first season starts in.
    #[arg(long, default_value_t = 2000)]
    pub first_year: i32,
    /// Teams promoted and relegated between adjacent tiers each season.
    #[arg(long, default_value_t = 2)]
    pub exchange: usize,
    /// Half-range of team strength around the league average, in [0, 1).
    #[arg(long, default_value_t = 0.35)]
    pub spread: f64,
    /// Bookmaker margin over the true outcome probabilities.
    #[arg(long, default_value_t = 0.045)]
    pub margin: f64,
    /// Half-width of the per-bookmaker margin noise.
    #[arg(long, default_value_t = 0.05)]
    pub jitter: f64,
    /// Bookmaker quotes per match.
    #[arg(long, default_value_t = 3)]
    pub bookmakers: usize,
    /// Generator seed; same seed, same dataset.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

pub fn run(args: &SynthArgs) -> Result<()> {
    let params = SynthParams {
        n_leagues: args.num_leagues,
        teams_per_league: args.teams,
        n_seasons: args.seasons,
        first_year: args.first_year,
        exchange: args.exchange,
        strength_spread: args.spread,
        seed: args.seed,
        odds_margin: args.margin,
        odds_jitter: args.jitter,
        n_bookmakers: args.bookmakers,
    };
    let (store, truth) = synth_store(&params)?;

    let dir = store_dir(&args.out);
    store.save(&dir)?;
    log::info!("wrote {} matches to {}", store.len(), dir.display());

    let truth_path = args.out.join("truth.json");
    serde_json::to_writer_pretty(create_file(&truth_path)?, &truth)
        .map_err(gapcast::Error::from)?;
    log::info!("wrote {}", truth_path.display());

    println!(
        "generated {} matches: {} leagues x {} seasons, {} teams each, seed {}",
        store.len(),
        args.num_leagues,
        args.seasons,
        args.teams,
        args.seed
    );
    Ok(())
}
