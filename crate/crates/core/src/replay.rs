//! From-scratch replay of a league's match history through the rating
//! engine.
//!
//! Replay is the single source of rating trajectories for every consumer:
//! the parameter objective, walk-forward forecast features, error tables
//! and rating snapshots. A replay always starts from the league's first
//! season with the statistic (zero initial ratings) and applies season
//! rollovers from the store's season table, so a given parameter triple
//! maps deterministically onto a full trajectory. Walk-forward consumers
//! re-replay from scratch under each season's scheduled parameters, which
//! keeps every forecast consistent with how those parameters were fitted.

use crate::data::{MatchStore, SeasonInfo};
use crate::error::Result;
use crate::params::ParamSchedule;
use crate::ratings::{LeagueRatingState, RatingParams, StatPrediction};
use crate::types::Statistic;

/// One match carrying the replayed statistic.
#[derive(Debug, Clone)]
pub struct StatMatch {
    /// Index of the source record in the store.
    pub record_idx: usize,
    pub season_idx: usize,
    pub home_team: String,
    pub away_team: String,
    pub home_value: f64,
    pub away_value: f64,
}

/// Chronological matches of one league that carry one statistic, together
/// with the season metadata needed for rollovers.
#[derive(Debug, Clone)]
pub struct LeagueStatHistory {
    pub league_id: String,
    pub statistic: Statistic,
    pub seasons: Vec<SeasonInfo>,
    pub matches: Vec<StatMatch>,
}

/// Pull per-league histories for a statistic out of a store, keeping only
/// matches that carry it. `before_season` truncates to seasons strictly
/// earlier than the given label.
pub fn extract_histories(
    store: &MatchStore,
    statistic: Statistic,
    before_season: Option<&str>,
) -> Vec<LeagueStatHistory> {
    let mut histories: Vec<LeagueStatHistory> = Vec::new();
    let mut league_slot: std::collections::BTreeMap<String, usize> =
        std::collections::BTreeMap::new();

    for (record_idx, record) in store.records.iter().enumerate() {
        if let Some(before) = before_season {
            if record.season.as_str() >= before {
                continue;
            }
        }
        let (Some(home_value), Some(away_value)) =
            (record.home_stat(statistic), record.away_stat(statistic))
        else {
            continue;
        };
        let slot = *league_slot
            .entry(record.league_id.clone())
            .or_insert_with(|| {
                histories.push(LeagueStatHistory {
                    league_id: record.league_id.clone(),
                    statistic,
                    seasons: Vec::new(),
                    matches: Vec::new(),
                });
                histories.len() - 1
            });
        let history = &mut histories[slot];
        let season_idx = match history
            .seasons
            .iter()
            .position(|info| info.season == record.season)
        {
            Some(idx) => idx,
            None => {
                let info = store
                    .seasons
                    .info(&record.league_id, &record.season)
                    .cloned()
                    .unwrap_or_else(|| SeasonInfo {
                        season: record.season.clone(),
                        teams: Default::default(),
                        arrivals: Default::default(),
                        promoted_out: Default::default(),
                        relegated_out: Default::default(),
                    });
                history.seasons.push(info);
                history.seasons.len() - 1
            }
        };
        history.matches.push(StatMatch {
            record_idx,
            season_idx,
            home_team: record.home_team.clone(),
            away_team: record.away_team.clone(),
            home_value,
            away_value,
        });
    }
    histories.sort_by(|a, b| a.league_id.cmp(&b.league_id));
    histories
}

/// Replay a history under one parameter triple, visiting every match with
/// its pre-match prediction. Stops after `last_season_idx` when given.
/// Returns the final rating state, `None` for an empty history.
pub fn replay_history<F>(
    history: &LeagueStatHistory,
    params: RatingParams,
    last_season_idx: Option<usize>,
    mut visit: F,
) -> Result<Option<LeagueRatingState>>
where
    F: FnMut(&StatMatch, StatPrediction),
{
    let mut state: Option<LeagueRatingState> = None;
    let mut current_season = usize::MAX;
    for m in &history.matches {
        if let Some(last) = last_season_idx {
            if m.season_idx > last {
                break;
            }
        }
        if m.season_idx != current_season {
            let info = &history.seasons[m.season_idx];
            state = Some(match state.take() {
                // First season with the statistic: teams start from zero.
                None => LeagueRatingState::new(
                    &history.league_id,
                    history.statistic,
                    params,
                    &info.season,
                ),
                Some(prev) => prev.season_rollover(
                    &info.season,
                    &info.teams,
                    &info.arrivals,
                    &info.promoted_out,
                    &info.relegated_out,
                ),
            });
            current_season = m.season_idx;
        }
        let state = state.as_mut().expect("state initialized above");
        let prediction = state.predict(&m.home_team, &m.away_team);
        visit(m, prediction);
        state.record_match(&m.home_team, &m.away_team, m.home_value, m.away_value)?;
    }
    Ok(state)
}

/// Pre-match statistic predictions for every record in the store, aligned
/// by index: `result[record_idx][stat.index()]`.
///
/// For each league season that has scheduled parameters, the full history
/// up to and including that season is replayed from scratch under those
/// parameters, and the predictions made inside the season are kept. Seasons
/// without an entry in the schedule (in particular each league's first
/// tracked season, which can only be fitted in hindsight) yield no
/// predictions.
pub fn walk_forward_predictions(
    store: &MatchStore,
    schedule: &ParamSchedule,
    stats: &[Statistic],
) -> Result<Vec<[Option<StatPrediction>; 4]>> {
    let mut out: Vec<[Option<StatPrediction>; 4]> = vec![Default::default(); store.len()];
    let mut done = [false; 4];
    for &stat in stats {
        if done[stat.index()] {
            continue;
        }
        done[stat.index()] = true;
        for history in extract_histories(store, stat, None) {
            for season_idx in 0..history.seasons.len() {
                let label = history.seasons[season_idx].season.as_str();
                let Some(params) = schedule.params_for(stat, label) else {
                    continue;
                };
                replay_history(&history, params, Some(season_idx), |m, prediction| {
                    if m.season_idx == season_idx {
                        out[m.record_idx][stat.index()] = Some(prediction);
                    }
                })?;
            }
        }
    }
    Ok(out)
}

/// Final rating state per league for one statistic, replayed under the
/// latest scheduled parameters for that league's last season.
pub fn final_states(
    store: &MatchStore,
    schedule: &ParamSchedule,
    statistic: Statistic,
) -> Result<Vec<LeagueRatingState>> {
    let mut states = Vec::new();
    for history in extract_histories(store, statistic, None) {
        let Some(last) = history.seasons.last() else { continue };
        let Some((_, params)) = schedule.latest_at_or_before(statistic, &last.season) else {
            continue;
        };
        if let Some(state) = replay_history(&history, params, None, |_, _| {})? {
            states.push(state);
        }
    }
    Ok(states)
}
