//! `gapcast backtest` — walk-forward betting simulation per combination.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gapcast::betting::report::{
    bin_by_overround, market_summary, profit_ci, write_bets_csv, write_bins_csv,
    write_cumulative_csv, write_market_csv, write_summary_json,
};
use gapcast::betting::{run_backtest, BacktestResult, Strategy};
use gapcast::ordinal::PredictorSpec;
use gapcast::params::ParamSchedule;
use gapcast::{Error, Result};

use super::aic::ModeArg;
use super::{create_file, load_schedule, load_store, reports_dir, DEFAULT_REPLICATES, DEFAULT_SEED};

#[derive(Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    /// One unit on every bet.
    Level,
    /// Kelly fractions, rescaled post hoc to a mean stake of one unit.
    Kelly,
    /// Run both staking strategies.
    Both,
}

impl StrategyArg {
    fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyArg::Level => vec![Strategy::LevelStakes],
            StrategyArg::Kelly => vec![Strategy::Kelly],
            StrategyArg::Both => vec![Strategy::LevelStakes, Strategy::Kelly],
        }
    }
}

#[derive(Args)]
pub struct BacktestArgs {
    /// Pipeline output directory holding the store and schedule.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated combination labels from the B menu, e.g. B1,B5.
    #[arg(long, default_value = "B1")]
    pub combos: String,
    /// Staking strategy.
    #[arg(long, value_enum, default_value_t = StrategyArg::Both)]
    pub strategy: StrategyArg,
    /// Only run the variant with the implied-probability predictor.
    #[arg(long, conflicts_with = "no_odds")]
    pub with_odds: bool,
    /// Only run the variant without the implied-probability predictor.
    #[arg(long)]
    pub no_odds: bool,
    /// Model-fitting objective for the daily refits.
    #[arg(long, value_enum, default_value_t = ModeArg::Ls)]
    pub mode: ModeArg,
    /// Seed for bootstrap confidence intervals.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Bootstrap replicates for profit confidence intervals.
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
}

fn parse_combos(raw: &str, with_odds: bool) -> Result<Vec<PredictorSpec>> {
    let mut specs = Vec::new();
    for part in raw.split(',') {
        let spec = PredictorSpec::from_label(part.trim(), with_odds)?;
        if !specs.iter().any(|s: &PredictorSpec| s.label == spec.label) {
            specs.push(spec);
        }
    }
    if specs.is_empty() {
        return Err(Error::invalid("empty combination list"));
    }
    Ok(specs)
}

pub fn run(args: &BacktestArgs) -> Result<()> {
    let odds_variants: &[bool] = match (args.with_odds, args.no_odds) {
        (true, _) => &[true],
        (_, true) => &[false],
        _ => &[false, true],
    };
    // Validate every label up front so a typo fails before any work runs.
    let needs_schedule = parse_combos(&args.combos, false)?
        .iter()
        .any(|s| !s.stats.is_empty());

    let store = load_store(&args.out)?;
    let schedule = if needs_schedule {
        load_schedule(&args.out)?
    } else {
        ParamSchedule::default()
    };

    let market = market_summary(&store, true, 1.0);
    let market_path = reports_dir(&args.out).join("market.csv");
    write_market_csv(&market, create_file(&market_path)?)?;
    log::info!(
        "odds on {} of {} eligible matches, {:.1}% with negative best-odds overround; wrote {}",
        market.n_with_odds,
        market.n_matches,
        100.0 * market.negative_share,
        market_path.display()
    );

    println!(
        "{:<6} {:<9} {:<6} {:>7} {:>12} {:>12} {:>8} {:>20}",
        "combo", "odds", "stake", "bets", "staked", "profit", "mean %", "95% CI"
    );
    for &with_odds in odds_variants {
        for spec in parse_combos(&args.combos, with_odds)? {
            for strategy in args.strategy.strategies() {
                let result =
                    run_backtest(&store, &schedule, &spec, strategy, args.mode.fit_mode())?;
                let ci = profit_ci(&result, args.replicates, args.seed)?;
                write_artifacts(&args.out, &result, ci.as_ref(), args)?;
                let ci_text = ci
                    .as_ref()
                    .map(|c| format!("({:+.2}, {:+.2})", c.lower, c.upper))
                    .unwrap_or("-".into());
                println!(
                    "{:<6} {:<9} {:<6} {:>7} {:>12.1} {:>12.2} {:>8.2} {:>20}",
                    result.spec.label,
                    if with_odds { "with" } else { "without" },
                    strategy.label(),
                    result.bets.len(),
                    result.total_stake,
                    result.total_profit,
                    result.mean_profit_pct,
                    ci_text
                );
            }
        }
    }
    Ok(())
}

fn write_artifacts(
    out: &std::path::Path,
    result: &BacktestResult,
    ci: Option<&gapcast::eval::BootstrapCi>,
    args: &BacktestArgs,
) -> Result<()> {
    let cell = format!(
        "{}_{}_{}",
        result.spec.label.to_ascii_lowercase(),
        if result.spec.with_odds { "withodds" } else { "noodds" },
        result.strategy.label()
    );
    let dir = reports_dir(out).join("backtest").join(cell);
    write_bets_csv(result, create_file(&dir.join("bets.csv"))?)?;
    write_summary_json(result, ci, create_file(&dir.join("summary.json"))?)?;
    write_cumulative_csv(result, create_file(&dir.join("cumulative.csv"))?)?;
    let bins = bin_by_overround(result, args.replicates, args.seed)?;
    write_bins_csv(&bins, create_file(&dir.join("bins.csv"))?)?;
    log::info!("wrote {}", dir.display());
    Ok(())
}
