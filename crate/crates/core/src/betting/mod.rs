//! Value betting against best market odds, evaluated walk-forward.
//!
//! On each day of the backtest the outcome model is refitted on all
//! eligible past matches, the day's eligible fixtures are forecast, and a
//! bet is placed on home or away whenever the forecast probability
//! strictly exceeds the probability implied by the best available odds.
//! Draws are never bet. Level staking puts one unit on every bet; Kelly
//! staking sizes bets by the Kelly fraction and then scales all stakes so
//! the mean stake is one unit, which makes the two strategies' returns
//! directly comparable.

pub mod report;

use chrono::NaiveDate;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{best_odds, MatchStore, OddsSummary};
use crate::error::{Error, Result};
use crate::ordinal::{self, Family, FitMode, Forecast, OrdinalModel, PredictorSpec};
use crate::replay::walk_forward_predictions;
use crate::types::{Outcome, Side};

pub use crate::types::Side as BetSide;

/// Staking scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    LevelStakes,
    Kelly,
}

impl Strategy {
    pub fn parse(s: &str) -> Result<Strategy> {
        match s.trim().to_ascii_lowercase().as_str() {
            "level" | "level_stakes" | "level-stakes" => Ok(Strategy::LevelStakes),
            "kelly" => Ok(Strategy::Kelly),
            other => Err(Error::invalid(format!("unknown strategy {other:?}"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Strategy::LevelStakes => "level",
            Strategy::Kelly => "kelly",
        }
    }
}

/// Fraction of the bankroll maximizing expected log wealth for a bet at
/// decimal `odds` won with probability `p`, floored at zero.
pub fn kelly_fraction(p: f64, odds: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    if !odds.is_finite() || odds <= 1.0 {
        return Err(Error::invalid(format!("decimal odds {odds} must exceed 1")));
    }
    Ok(((odds * p - 1.0) / (odds - 1.0)).max(0.0))
}

/// One placed bet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetRecord {
    pub match_id: String,
    pub league_id: String,
    pub season: String,
    pub date: NaiveDate,
    pub side: Side,
    /// Best decimal odds taken.
    pub odds: f64,
    pub model_prob: f64,
    pub implied_prob: f64,
    /// Overround of the best-odds triple at bet time.
    pub overround: f64,
    /// Raw Kelly fraction before any rescaling.
    pub kelly_fraction: f64,
    pub stake: f64,
    pub won: bool,
    pub profit: f64,
}

/// Outcome of one backtest run.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub strategy: Strategy,
    pub spec: PredictorSpec,
    pub mode: FitMode,
    pub bets: Vec<BetRecord>,
    /// Eligible matches with features and odds that were forecast.
    pub n_matches_forecast: u64,
    pub n_days_fitted: u64,
    /// Days with forecastable fixtures but not enough training history.
    pub n_days_skipped: u64,
    pub total_stake: f64,
    pub total_profit: f64,
    /// Profit per unit staked, in percent.
    pub mean_profit_pct: f64,
}

impl BacktestResult {
    /// Check the staking contract: level stakes are exactly one unit,
    /// Kelly stakes average one unit to within 1e-9.
    pub fn validate_stakes(&self) -> Result<()> {
        if self.bets.is_empty() {
            return Ok(());
        }
        match self.strategy {
            Strategy::LevelStakes => {
                if let Some(bad) = self.bets.iter().find(|b| b.stake != 1.0) {
                    return Err(Error::invalid(format!(
                        "level stake of {} on {}",
                        bad.stake, bad.match_id
                    )));
                }
            }
            Strategy::Kelly => {
                let mean = self.total_stake / self.bets.len() as f64;
                if (mean - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!(
                        "kelly stakes average {mean}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Sides whose forecast probability strictly beats the implied
/// probability of the best odds, with their raw Kelly fractions. Both
/// sides can qualify when the overround is negative.
pub fn select_bets(forecast: &Forecast, odds: &OddsSummary) -> Result<Vec<(Side, f64)>> {
    let mut bets = Vec::new();
    if forecast.home > odds.implied_home {
        bets.push((Side::Home, kelly_fraction(forecast.home, odds.max_home)?));
    }
    if forecast.away > odds.implied_away {
        bets.push((Side::Away, kelly_fraction(forecast.away, odds.max_away)?));
    }
    Ok(bets)
}

fn bet_won(side: Side, outcome: Outcome) -> bool {
    matches!(
        (side, outcome),
        (Side::Home, Outcome::HomeWin) | (Side::Away, Outcome::AwayWin)
    )
}

/// Run a walk-forward backtest of one predictor combination and staking
/// scheme over a store.
///
/// The day loop refits the model each day that has forecastable fixtures,
/// training on every eligible earlier match with complete features (at
/// least 50, all three outcomes seen, else the day is skipped), then
/// forecasts and bets the day's fixtures. Matches without usable odds are
/// forecast for training purposes but never bet. Observed-statistic
/// combinations are rejected: their features only exist after full time.
pub fn run_backtest(
    store: &MatchStore,
    schedule: &crate::params::ParamSchedule,
    spec: &PredictorSpec,
    strategy: Strategy,
    mode: FitMode,
) -> Result<BacktestResult> {
    if spec.family == Family::Observed {
        return Err(Error::invalid(format!(
            "{}: observed statistics are unavailable before kick-off and cannot be backtested",
            spec.label
        )));
    }
    let predictions = if spec.stats.is_empty() {
        vec![Default::default(); store.len()]
    } else {
        walk_forward_predictions(store, schedule, &spec.stats)?
    };

    let mut training: Vec<(Vec<f64>, Outcome)> = Vec::new();
    let mut outcome_counts = [0usize; 3];
    let mut model: Option<OrdinalModel> = None;
    let mut bets: Vec<BetRecord> = Vec::new();
    let mut n_matches_forecast = 0u64;
    let mut n_days_fitted = 0u64;
    let mut n_days_skipped = 0u64;

    let n = store.len();
    let mut day_start = 0usize;
    while day_start < n {
        let date = store.records[day_start].date;
        let mut day_end = day_start;
        while day_end < n && store.records[day_end].date == date {
            day_end += 1;
        }

        // The day's forecastable fixtures: eligible, with features.
        let mut day_rows: Vec<(usize, Vec<f64>, Option<OddsSummary>)> = Vec::new();
        for idx in day_start..day_end {
            if !store.flags[idx].eligible {
                continue;
            }
            let record = &store.records[idx];
            let odds = best_odds(record).ok();
            let features =
                ordinal::build_features(record, &predictions[idx], odds.as_ref(), spec);
            if let Some(features) = features {
                day_rows.push((idx, features, odds));
            }
        }

        if !day_rows.is_empty() {
            let trainable =
                training.len() >= 50 && outcome_counts.iter().all(|&c| c > 0);
            if trainable {
                match ordinal::fit_with_start(&training, spec, mode, model.as_ref()) {
                    Ok(fitted) => {
                        model = Some(fitted);
                        n_days_fitted += 1;
                        let model = model.as_ref().expect("just fitted");
                        for (idx, features, odds) in &day_rows {
                            let Some(odds) = odds else { continue };
                            let forecast = model.predict(features)?;
                            n_matches_forecast += 1;
                            let record = &store.records[*idx];
                            for (side, kelly) in select_bets(&forecast, odds)? {
                                let (odds_taken, model_prob, implied_prob) = match side {
                                    Side::Home => {
                                        (odds.max_home, forecast.home, odds.implied_home)
                                    }
                                    Side::Away => {
                                        (odds.max_away, forecast.away, odds.implied_away)
                                    }
                                };
                                bets.push(BetRecord {
                                    match_id: record.match_id(),
                                    league_id: record.league_id.clone(),
                                    season: record.season.clone(),
                                    date: record.date,
                                    side,
                                    odds: odds_taken,
                                    model_prob,
                                    implied_prob,
                                    overround: odds.overround,
                                    kelly_fraction: kelly,
                                    stake: 0.0,
                                    won: bet_won(side, record.outcome),
                                    profit: 0.0,
                                });
                            }
                        }
                    }
                    Err(e) => {
                        warn!("{date}: model fit failed, day skipped: {e}");
                        n_days_skipped += 1;
                    }
                }
            } else {
                n_days_skipped += 1;
            }
            // Today's matches join the training pool after the day closes.
            for (idx, features, _) in day_rows {
                outcome_counts[store.records[idx].outcome.rank()] += 1;
                training.push((features, store.records[idx].outcome));
            }
        }
        day_start = day_end;
    }

    // Stake sizing. Kelly fractions are strictly positive for every
    // selected bet, so the rescaling to mean stake one is well defined.
    match strategy {
        Strategy::LevelStakes => {
            for bet in &mut bets {
                bet.stake = 1.0;
            }
        }
        Strategy::Kelly => {
            let total_fraction: f64 = bets.iter().map(|b| b.kelly_fraction).sum();
            if total_fraction > 0.0 {
                let scale = bets.len() as f64 / total_fraction;
                for bet in &mut bets {
                    bet.stake = scale * bet.kelly_fraction;
                }
            }
        }
    }
    let mut total_stake = 0.0;
    let mut total_profit = 0.0;
    for bet in &mut bets {
        bet.profit = if bet.won {
            bet.stake * (bet.odds - 1.0)
        } else {
            -bet.stake
        };
        total_stake += bet.stake;
        total_profit += bet.profit;
    }
    let mean_profit_pct = if total_stake > 0.0 {
        100.0 * total_profit / total_stake
    } else {
        0.0
    };

    let result = BacktestResult {
        strategy,
        spec: spec.clone(),
        mode,
        bets,
        n_matches_forecast,
        n_days_fitted,
        n_days_skipped,
        total_stake,
        total_profit,
        mean_profit_pct,
    };
    result.validate_stakes()?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kelly_fraction_known_values() {
        // p = 0.5 at odds 2.5: f = (1.25 - 1) / 1.5 = 1/6.
        assert_abs_diff_eq!(
            kelly_fraction(0.5, 2.5).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-12
        );
        // Fair odds: no edge, no bet.
        assert_abs_diff_eq!(kelly_fraction(0.25, 4.0).unwrap(), 0.0, epsilon = 1e-12);
        // Negative edge floors at zero.
        assert_eq!(kelly_fraction(0.2, 4.0).unwrap(), 0.0);
        // Certainty stakes everything.
        assert_abs_diff_eq!(kelly_fraction(1.0, 3.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(kelly_fraction(1.1, 2.0).is_err());
        assert!(kelly_fraction(0.5, 1.0).is_err());
    }

    fn summary(h: f64, d: f64, a: f64) -> OddsSummary {
        OddsSummary {
            max_home: h,
            max_draw: d,
            max_away: a,
            implied_home: 1.0 / h,
            implied_draw: 1.0 / d,
            implied_away: 1.0 / a,
            overround: 1.0 / h + 1.0 / d + 1.0 / a - 1.0,
        }
    }

    #[test]
    fn value_rule_is_strict_and_sides_are_independent() {
        let odds = summary(2.0, 3.5, 4.0);
        let forecast = Forecast {
            home: 0.5,
            draw: 0.3,
            away: 0.2,
        };
        // Home probability exactly equals implied: no bet either side.
        assert!(select_bets(&forecast, &odds).unwrap().is_empty());

        let forecast = Forecast {
            home: 0.55,
            draw: 0.25,
            away: 0.2,
        };
        let bets = select_bets(&forecast, &odds).unwrap();
        assert_eq!(bets.len(), 1);
        assert_eq!(bets[0].0, Side::Home);
        assert!(bets[0].1 > 0.0);
    }

    #[test]
    fn negative_overround_can_put_both_sides_in_play() {
        // Implied: 0.48 + 0.23 + 0.28 = 0.99, overround -1%.
        let odds = summary(1.0 / 0.48, 1.0 / 0.23, 1.0 / 0.28);
        assert!(odds.overround < 0.0);
        let forecast = Forecast {
            home: 0.52,
            draw: 0.18,
            away: 0.30,
        };
        let bets = select_bets(&forecast, &odds).unwrap();
        assert_eq!(bets.len(), 2);
        assert!(bets.iter().all(|(_, k)| *k > 0.0));
    }

    #[test]
    fn draws_are_never_bet() {
        let odds = summary(3.0, 3.0, 3.0);
        let forecast = Forecast {
            home: 0.1,
            draw: 0.8,
            away: 0.1,
        };
        assert!(select_bets(&forecast, &odds).unwrap().is_empty());
    }

    #[test]
    fn observed_statistic_specs_cannot_be_backtested() {
        let (store, _) = crate::eval::synth::synth_store(&Default::default()).unwrap();
        let schedule = crate::params::ParamSchedule::default();
        let spec = PredictorSpec::from_label("A1", false).unwrap();
        let err = run_backtest(
            &store,
            &schedule,
            &spec,
            Strategy::LevelStakes,
            FitMode::LeastSquares,
        )
        .unwrap_err();
        assert!(err.to_string().contains("kick-off"));
    }

    #[test]
    fn odds_only_backtest_keeps_the_staking_contracts() {
        // The odds-only combination needs no statistic forecasts, so an
        // empty parameter schedule suffices.
        let (store, _) = crate::eval::synth::synth_store(&Default::default()).unwrap();
        let schedule = crate::params::ParamSchedule::default();
        let spec = PredictorSpec::from_label("B0", true).unwrap();

        let level = run_backtest(
            &store,
            &schedule,
            &spec,
            Strategy::LevelStakes,
            FitMode::LeastSquares,
        )
        .unwrap();
        assert!(level.n_days_fitted > 0);
        assert!(!level.bets.is_empty());
        assert!(level.bets.iter().all(|b| b.stake == 1.0));
        assert_abs_diff_eq!(level.total_stake, level.bets.len() as f64, epsilon = 1e-9);

        let kelly = run_backtest(
            &store,
            &schedule,
            &spec,
            Strategy::Kelly,
            FitMode::LeastSquares,
        )
        .unwrap();
        // Same model, same forecasts: the bet selection must agree.
        assert_eq!(level.bets.len(), kelly.bets.len());
        for (a, b) in level.bets.iter().zip(&kelly.bets) {
            assert_eq!(a.match_id, b.match_id);
            assert_eq!(a.side, b.side);
            assert_abs_diff_eq!(a.kelly_fraction, b.kelly_fraction, epsilon = 1e-12);
        }
        let mean_stake = kelly.total_stake / kelly.bets.len() as f64;
        assert_abs_diff_eq!(mean_stake, 1.0, epsilon = 1e-9);
        assert!(kelly.bets.iter().any(|b| (b.stake - 1.0).abs() > 1e-3));

        for bet in &kelly.bets {
            assert!(bet.model_prob > bet.implied_prob);
            assert!(bet.kelly_fraction > 0.0);
            assert!(bet.odds > 1.0);
            let expected = if bet.won {
                bet.stake * (bet.odds - 1.0)
            } else {
                -bet.stake
            };
            assert_abs_diff_eq!(bet.profit, expected, epsilon = 1e-12);
        }
        let profit: f64 = kelly.bets.iter().map(|b| b.profit).sum();
        assert_abs_diff_eq!(profit, kelly.total_profit, epsilon = 1e-9);
        assert_abs_diff_eq!(
            kelly.mean_profit_pct,
            100.0 * kelly.total_profit / kelly.total_stake,
            epsilon = 1e-9
        );
    }

    #[test]
    fn training_only_uses_past_days() {
        // Truncating the store after a date must reproduce the identical
        // bets up to that date: nothing later can leak into earlier fits.
        let (store, _) = crate::eval::synth::synth_store(&Default::default()).unwrap();
        let schedule = crate::params::ParamSchedule::default();
        let spec = PredictorSpec::from_label("B0", true).unwrap();
        let full = run_backtest(
            &store,
            &schedule,
            &spec,
            Strategy::LevelStakes,
            FitMode::LeastSquares,
        )
        .unwrap();
        let cutoff = chrono::NaiveDate::from_ymd_opt(2003, 7, 1).unwrap();
        let truncated = store.truncate(cutoff);
        let early = run_backtest(
            &truncated,
            &schedule,
            &spec,
            Strategy::LevelStakes,
            FitMode::LeastSquares,
        )
        .unwrap();
        let full_early: Vec<&BetRecord> =
            full.bets.iter().filter(|b| b.date <= cutoff).collect();
        assert_eq!(full_early.len(), early.bets.len());
        for (a, b) in full_early.iter().zip(&early.bets) {
            assert_eq!(a.match_id, b.match_id);
            assert_eq!(a.side, b.side);
            assert_abs_diff_eq!(a.model_prob, b.model_prob, epsilon = 1e-12);
        }
    }
}
