//! Forecast evaluation: bootstrap confidence intervals, mean absolute
//! error against league-mean baselines, and prediction scatter exports.

pub mod synth;

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::MatchStore;
use crate::error::{Error, Result};
use crate::params::ParamSchedule;
use crate::replay::walk_forward_predictions;
use crate::types::{Side, Statistic};

/// Two-sided percentile bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    /// Statistic on the original sample.
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub replicates: usize,
}

const CI_LEVEL: f64 = 0.95;

/// Quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= n {
        return sorted[n - 1];
    }
    let frac = pos - i as f64;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

fn percentile_ci(
    point: f64,
    mut stats: Vec<f64>,
    replicates: usize,
) -> BootstrapCi {
    stats.sort_by(|a, b| a.total_cmp(b));
    let alpha = (1.0 - CI_LEVEL) / 2.0;
    BootstrapCi {
        point,
        lower: quantile(&stats, alpha),
        upper: quantile(&stats, 1.0 - alpha),
        level: CI_LEVEL,
        replicates,
    }
}

fn check_bootstrap_inputs(n: usize, replicates: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::not_enough(format!(
            "bootstrap needs at least 2 observations, got {n}"
        )));
    }
    if replicates == 0 {
        return Err(Error::invalid("bootstrap needs at least 1 replicate"));
    }
    Ok(())
}

/// Percentile bootstrap interval for a sample mean. Deterministic for a
/// given seed.
pub fn bootstrap_mean_ci(
    values: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<BootstrapCi> {
    check_bootstrap_inputs(values.len(), replicates)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in bootstrap sample"));
    }
    let n = values.len();
    let point = values.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += values[rng.random_range(0..n)];
        }
        stats.push(sum / n as f64);
    }
    Ok(percentile_ci(point, stats, replicates))
}

/// Percentile bootstrap interval for a ratio of sums,
/// `scale * sum(numerators) / sum(denominators)`, resampling pairs.
/// With pairs of (profit, stake) and scale 100 this is the interval for
/// profit per unit staked in percent. All denominators must be positive.
pub fn bootstrap_ratio_ci(
    pairs: &[(f64, f64)],
    scale: f64,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapCi> {
    check_bootstrap_inputs(pairs.len(), replicates)?;
    for (num, den) in pairs {
        if !num.is_finite() || !den.is_finite() {
            return Err(Error::invalid("non-finite value in bootstrap sample"));
        }
        if *den <= 0.0 {
            return Err(Error::invalid(format!(
                "ratio bootstrap requires positive denominators, got {den}"
            )));
        }
    }
    let n = pairs.len();
    let ratio = |ps: &mut dyn Iterator<Item = &(f64, f64)>| {
        let (mut num, mut den) = (0.0, 0.0);
        for (p, s) in ps {
            num += p;
            den += s;
        }
        scale * num / den
    };
    let point = ratio(&mut pairs.iter());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let (mut num, mut den) = (0.0, 0.0);
        for _ in 0..n {
            let (p, s) = pairs[rng.random_range(0..n)];
            num += p;
            den += s;
        }
        stats.push(scale * num / den);
    }
    Ok(percentile_ci(point, stats, replicates))
}

/// Benchmark the rating forecasts are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// League mean of the statistic over all earlier matches. The honest
    /// benchmark: it only uses information available at kick-off.
    Running,
    /// League mean over the whole dataset, future included. Stronger than
    /// anything available in real time; useful as a stress benchmark.
    FullSample,
}

impl BaselineMode {
    pub fn parse(s: &str) -> Result<BaselineMode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "running" => Ok(BaselineMode::Running),
            "full" | "full_sample" | "full-sample" => Ok(BaselineMode::FullSample),
            other => Err(Error::invalid(format!("unknown baseline {other:?}"))),
        }
    }
}

/// Mean absolute error of the rating forecasts and of the baseline for
/// one statistic and side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaeRow {
    pub statistic: Statistic,
    pub side: Side,
    pub n: u64,
    pub mae_model: f64,
    pub mae_baseline: f64,
}

#[derive(Default, Clone, Copy)]
struct SideSums {
    home: f64,
    away: f64,
    n: u64,
}

/// Compare walk-forward statistic forecasts against a per-league mean
/// baseline, over eligible forecastable matches. Two rows per statistic,
/// home and away, built from the same match set.
pub fn mae_table(
    store: &MatchStore,
    schedule: &ParamSchedule,
    stats: &[Statistic],
    mode: BaselineMode,
) -> Result<Vec<MaeRow>> {
    let predictions = walk_forward_predictions(store, schedule, stats)?;
    let mut rows = Vec::new();
    for &stat in stats {
        // League totals; for the running baseline they accumulate as the
        // loop advances, for the full-sample baseline they are complete
        // before scoring starts.
        let mut sums: BTreeMap<&str, SideSums> = BTreeMap::new();
        if mode == BaselineMode::FullSample {
            for record in &store.records {
                if let (Some(h), Some(a)) = (record.home_stat(stat), record.away_stat(stat)) {
                    let entry = sums.entry(record.league_id.as_str()).or_default();
                    entry.home += h;
                    entry.away += a;
                    entry.n += 1;
                }
            }
        }
        let mut err_model = SideSums::default();
        let mut err_base = SideSums::default();
        for (idx, record) in store.records.iter().enumerate() {
            let observed = match (record.home_stat(stat), record.away_stat(stat)) {
                (Some(h), Some(a)) => Some((h, a)),
                _ => None,
            };
            if let Some((obs_h, obs_a)) = observed {
                let baseline = sums
                    .get(record.league_id.as_str())
                    .filter(|s| s.n > 0)
                    .map(|s| (s.home / s.n as f64, s.away / s.n as f64));
                if let (true, Some(pred), Some((base_h, base_a))) = (
                    store.flags[idx].eligible,
                    predictions[idx][stat.index()],
                    baseline,
                ) {
                    err_model.home += (obs_h - pred.home).abs();
                    err_model.away += (obs_a - pred.away).abs();
                    err_base.home += (obs_h - base_h).abs();
                    err_base.away += (obs_a - base_a).abs();
                    err_model.n += 1;
                }
                if mode == BaselineMode::Running {
                    let entry = sums.entry(record.league_id.as_str()).or_default();
                    entry.home += obs_h;
                    entry.away += obs_a;
                    entry.n += 1;
                }
            }
        }
        if err_model.n == 0 {
            return Err(Error::not_enough(format!(
                "no forecastable matches for {}",
                stat.label()
            )));
        }
        let n = err_model.n;
        rows.push(MaeRow {
            statistic: stat,
            side: Side::Home,
            n,
            mae_model: err_model.home / n as f64,
            mae_baseline: err_base.home / n as f64,
        });
        rows.push(MaeRow {
            statistic: stat,
            side: Side::Away,
            n,
            mae_model: err_model.away / n as f64,
            mae_baseline: err_base.away / n as f64,
        });
    }
    Ok(rows)
}

pub fn write_mae_csv<W: Write>(rows: &[MaeRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["statistic", "side", "n", "mae_model", "mae_baseline"])?;
    for row in rows {
        w.write_record([
            row.statistic.label(),
            row.side.label(),
            &row.n.to_string(),
            &format!("{:.4}", row.mae_model),
            &format!("{:.4}", row.mae_baseline),
        ])?;
    }
    w.flush().map_err(Error::from)?;
    Ok(())
}

/// Predicted-versus-observed pairs for eligible forecastable matches,
/// two rows (home and away) per match and statistic.
pub fn write_scatter_csv<W: Write>(
    store: &MatchStore,
    schedule: &ParamSchedule,
    stats: &[Statistic],
    writer: W,
) -> Result<()> {
    let predictions = walk_forward_predictions(store, schedule, stats)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "league",
        "season",
        "date",
        "home_team",
        "away_team",
        "statistic",
        "side",
        "predicted",
        "observed",
    ])?;
    for (idx, record) in store.records.iter().enumerate() {
        if !store.flags[idx].eligible {
            continue;
        }
        for &stat in stats {
            let (Some(pred), Some(obs_h), Some(obs_a)) = (
                predictions[idx][stat.index()],
                record.home_stat(stat),
                record.away_stat(stat),
            ) else {
                continue;
            };
            for (side, predicted, observed) in [
                (Side::Home, pred.home, obs_h),
                (Side::Away, pred.away, obs_a),
            ] {
                w.write_record([
                    record.league_id.as_str(),
                    record.season.as_str(),
                    &record.date.format("%Y-%m-%d").to_string(),
                    record.home_team.as_str(),
                    record.away_team.as_str(),
                    stat.label(),
                    side.label(),
                    &format!("{predicted:.4}"),
                    &format!("{observed}"),
                ])?;
            }
        }
    }
    w.flush().map_err(Error::from)?;
    Ok(())
}
