//! Backtest reporting: bet logs, summaries, cumulative profit series,
//! overround bins, and market-level odds statistics.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::betting::{BacktestResult, BetRecord};
use crate::data::{best_odds, MatchStore};
use crate::error::Result;
use crate::eval::{bootstrap_ratio_ci, BootstrapCi};

/// Edges of the overround bins, in percent.
pub const OVERROUND_BIN_EDGES: [f64; 4] = [0.0, 2.5, 5.0, 7.5];

/// Aggregate returns of the bets whose best-odds overround fell in one bin.
#[derive(Debug, Clone, Serialize)]
pub struct OverroundBin {
    pub label: String,
    pub lower_pct: f64,
    pub upper_pct: f64,
    pub n_bets: usize,
    pub total_stake: f64,
    pub total_profit: f64,
    pub mean_profit_pct: Option<f64>,
    pub profit_ci: Option<BootstrapCi>,
}

fn bin_index(overround_pct: f64) -> usize {
    OVERROUND_BIN_EDGES
        .iter()
        .position(|edge| overround_pct < *edge)
        .unwrap_or(OVERROUND_BIN_EDGES.len())
}

fn bin_bounds(index: usize) -> (f64, f64, String) {
    let lower = if index == 0 {
        f64::NEG_INFINITY
    } else {
        OVERROUND_BIN_EDGES[index - 1]
    };
    let upper = if index == OVERROUND_BIN_EDGES.len() {
        f64::INFINITY
    } else {
        OVERROUND_BIN_EDGES[index]
    };
    let label = match (lower.is_infinite(), upper.is_infinite()) {
        (true, _) => format!("< {upper}%"),
        (_, true) => format!(">= {lower}%"),
        _ => format!("{lower}% to {upper}%"),
    };
    (lower, upper, label)
}

/// Group a backtest's bets by the overround of the odds they were struck
/// at and bootstrap a profit interval per bin. `replicates = 0` skips the
/// intervals.
pub fn bin_by_overround(
    result: &BacktestResult,
    replicates: usize,
    seed: u64,
) -> Result<Vec<OverroundBin>> {
    let mut groups: Vec<Vec<&BetRecord>> = vec![Vec::new(); OVERROUND_BIN_EDGES.len() + 1];
    for bet in &result.bets {
        groups[bin_index(100.0 * bet.overround)].push(bet);
    }
    let mut bins = Vec::new();
    for (index, group) in groups.iter().enumerate() {
        let (lower_pct, upper_pct, label) = bin_bounds(index);
        let total_stake: f64 = group.iter().map(|b| b.stake).sum();
        let total_profit: f64 = group.iter().map(|b| b.profit).sum();
        let mean_profit_pct =
            (total_stake > 0.0).then(|| 100.0 * total_profit / total_stake);
        let pairs: Vec<(f64, f64)> = group.iter().map(|b| (b.profit, b.stake)).collect();
        let profit_ci = if replicates > 0 && pairs.len() >= 2 {
            Some(bootstrap_ratio_ci(
                &pairs,
                100.0,
                replicates,
                seed.wrapping_add(index as u64),
            )?)
        } else {
            None
        };
        bins.push(OverroundBin {
            label,
            lower_pct,
            upper_pct,
            n_bets: group.len(),
            total_stake,
            total_profit,
            mean_profit_pct,
            profit_ci,
        });
    }
    Ok(bins)
}

/// Bootstrap interval for the whole backtest's profit per unit staked,
/// in percent. `None` with fewer than two bets.
pub fn profit_ci(
    result: &BacktestResult,
    replicates: usize,
    seed: u64,
) -> Result<Option<BootstrapCi>> {
    if result.bets.len() < 2 {
        return Ok(None);
    }
    let pairs: Vec<(f64, f64)> =
        result.bets.iter().map(|b| (b.profit, b.stake)).collect();
    Ok(Some(bootstrap_ratio_ci(&pairs, 100.0, replicates, seed)?))
}

pub fn write_bets_csv<W: Write>(result: &BacktestResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "match_id",
        "league",
        "season",
        "date",
        "side",
        "odds",
        "model_prob",
        "implied_prob",
        "overround_pct",
        "kelly_fraction",
        "stake",
        "won",
        "profit",
    ])?;
    for bet in &result.bets {
        w.write_record([
            bet.match_id.as_str(),
            bet.league_id.as_str(),
            bet.season.as_str(),
            &bet.date.format("%Y-%m-%d").to_string(),
            bet.side.label(),
            &format!("{:.4}", bet.odds),
            &format!("{:.6}", bet.model_prob),
            &format!("{:.6}", bet.implied_prob),
            &format!("{:.4}", 100.0 * bet.overround),
            &format!("{:.6}", bet.kelly_fraction),
            &format!("{:.6}", bet.stake),
            if bet.won { "1" } else { "0" },
            &format!("{:.6}", bet.profit),
        ])?;
    }
    w.flush().map_err(crate::error::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    combination: &'a str,
    statistics: String,
    with_odds: bool,
    strategy: &'a str,
    fit: &'a str,
    n_bets: usize,
    n_matches_forecast: u64,
    n_days_fitted: u64,
    n_days_skipped: u64,
    total_stake: f64,
    total_profit: f64,
    mean_profit_pct: f64,
    profit_ci: Option<&'a BootstrapCi>,
}

pub fn write_summary_json<W: Write>(
    result: &BacktestResult,
    ci: Option<&BootstrapCi>,
    writer: W,
) -> Result<()> {
    let summary = SummaryJson {
        combination: &result.spec.label,
        statistics: result.spec.stats_label(),
        with_odds: result.spec.with_odds,
        strategy: result.strategy.label(),
        fit: result.mode.label(),
        n_bets: result.bets.len(),
        n_matches_forecast: result.n_matches_forecast,
        n_days_fitted: result.n_days_fitted,
        n_days_skipped: result.n_days_skipped,
        total_stake: result.total_stake,
        total_profit: result.total_profit,
        mean_profit_pct: result.mean_profit_pct,
        profit_ci: ci,
    };
    serde_json::to_writer_pretty(writer, &summary)?;
    Ok(())
}

/// Running stake and profit per league and overall, one row per league
/// and date with at least one bet, ordered for plotting.
pub fn write_cumulative_csv<W: Write>(result: &BacktestResult, writer: W) -> Result<()> {
    let mut series: BTreeMap<(String, chrono::NaiveDate), (usize, f64, f64)> =
        BTreeMap::new();
    for bet in &result.bets {
        for key in ["overall".to_string(), bet.league_id.clone()] {
            let entry = series.entry((key, bet.date)).or_insert((0, 0.0, 0.0));
            entry.0 += 1;
            entry.1 += bet.stake;
            entry.2 += bet.profit;
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["league", "date", "n_bets", "cum_stake", "cum_profit"])?;
    let mut totals: BTreeMap<String, (usize, f64, f64)> = BTreeMap::new();
    for ((league, date), (n, stake, profit)) in series {
        let acc = totals.entry(league.clone()).or_insert((0, 0.0, 0.0));
        acc.0 += n;
        acc.1 += stake;
        acc.2 += profit;
        w.write_record([
            league.as_str(),
            &date.format("%Y-%m-%d").to_string(),
            &acc.0.to_string(),
            &format!("{:.6}", acc.1),
            &format!("{:.6}", acc.2),
        ])?;
    }
    w.flush().map_err(crate::error::Error::from)?;
    Ok(())
}

pub fn write_bins_csv<W: Write>(bins: &[OverroundBin], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "bin",
        "lower_pct",
        "upper_pct",
        "n_bets",
        "total_stake",
        "total_profit",
        "mean_profit_pct",
        "ci_lower",
        "ci_upper",
    ])?;
    let fmt = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
    for bin in bins {
        w.write_record([
            bin.label.as_str(),
            &format!("{}", bin.lower_pct),
            &format!("{}", bin.upper_pct),
            &bin.n_bets.to_string(),
            &format!("{:.6}", bin.total_stake),
            &format!("{:.6}", bin.total_profit),
            &fmt(bin.mean_profit_pct),
            &fmt(bin.profit_ci.as_ref().map(|c| c.lower)),
            &fmt(bin.profit_ci.as_ref().map(|c| c.upper)),
        ])?;
    }
    w.flush().map_err(crate::error::Error::from)?;
    Ok(())
}

/// Distribution of best-odds overrounds across a whole store.
#[derive(Debug, Clone, Serialize)]
pub struct MarketSummary {
    pub n_matches: usize,
    pub n_with_odds: usize,
    pub n_negative_overround: usize,
    /// Share of matches with odds whose best-odds overround is negative.
    pub negative_share: f64,
    pub mean_overround_pct: f64,
    /// Histogram counts over percent bins of `bin_width_pct`, keyed by
    /// each bin's lower edge.
    pub histogram: BTreeMap<i64, usize>,
    pub bin_width_pct: f64,
}

pub fn market_summary(
    store: &MatchStore,
    eligible_only: bool,
    bin_width_pct: f64,
) -> MarketSummary {
    let mut n_matches = 0usize;
    let mut n_with_odds = 0usize;
    let mut n_negative = 0usize;
    let mut sum_pct = 0.0;
    let mut histogram: BTreeMap<i64, usize> = BTreeMap::new();
    for (record, flag) in store.iter_with_flags() {
        if eligible_only && !flag.eligible {
            continue;
        }
        n_matches += 1;
        let Ok(summary) = best_odds(record) else {
            continue;
        };
        n_with_odds += 1;
        let pct = 100.0 * summary.overround;
        sum_pct += pct;
        if summary.overround < 0.0 {
            n_negative += 1;
        }
        let bin = (pct / bin_width_pct).floor() as i64;
        *histogram.entry(bin).or_insert(0) += 1;
    }
    MarketSummary {
        n_matches,
        n_with_odds,
        n_negative_overround: n_negative,
        negative_share: if n_with_odds > 0 {
            n_negative as f64 / n_with_odds as f64
        } else {
            0.0
        },
        mean_overround_pct: if n_with_odds > 0 {
            sum_pct / n_with_odds as f64
        } else {
            0.0
        },
        histogram,
        bin_width_pct,
    }
}

pub fn write_market_csv<W: Write>(summary: &MarketSummary, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["bin_lower_pct", "bin_upper_pct", "count"])?;
    for (bin, count) in &summary.histogram {
        let lower = *bin as f64 * summary.bin_width_pct;
        w.write_record([
            &format!("{lower:.2}"),
            &format!("{:.2}", lower + summary.bin_width_pct),
            &count.to_string(),
        ])?;
    }
    w.flush().map_err(crate::error::Error::from)?;
    Ok(())
}
