//! Forecast eligibility of matches.
//!
//! A match enters forecasting and betting only when (a) every required
//! statistic is present, (b) the home team has already played at least six
//! matches that season, (c) the home team has at least six matches left
//! after this one, and (d) the season is not the league's first with the
//! required statistics. The remaining-match count is taken from the fixture
//! list itself, so eligibility is a property of the assembled dataset and
//! is computed once at ingestion.

use std::collections::HashMap;

use crate::data::{EligibilityFlag, EligibilityReason, MatchRecord};
use crate::types::Statistic;

/// Minimum matches the home team must have played, and still have left,
/// within the season.
const MIN_WINDOW: u32 = 6;

/// Flag every record; the result is aligned index-for-index with `records`.
/// Records must be date-sorted within each league.
pub fn compute_eligibility(
    records: &[MatchRecord],
    required: &[Statistic],
) -> Vec<EligibilityFlag> {
    let mut flags = vec![EligibilityFlag::from_reason(EligibilityReason::Ok); records.len()];

    let mut by_league: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        by_league.entry(r.league_id.as_str()).or_default().push(i);
    }

    for indices in by_league.values() {
        // Seasons in chronological first-appearance order; the first with
        // the required statistics available is the rating warm-up season.
        let mut season_order: Vec<&str> = Vec::new();
        for &i in indices {
            let season = records[i].season.as_str();
            if !season_order.contains(&season) {
                season_order.push(season);
            }
        }
        let first_stat_season = season_order
            .iter()
            .find(|season| {
                indices.iter().any(|&i| {
                    records[i].season == **season && records[i].has_stats(required)
                })
            })
            .copied();

        let mut totals: HashMap<(&str, &str), u32> = HashMap::new();
        for &i in indices {
            let r = &records[i];
            *totals.entry((r.season.as_str(), r.home_team.as_str())).or_default() += 1;
            *totals.entry((r.season.as_str(), r.away_team.as_str())).or_default() += 1;
        }

        let mut played: HashMap<(&str, &str), u32> = HashMap::new();
        for &i in indices {
            let r = &records[i];
            let home_key = (r.season.as_str(), r.home_team.as_str());
            let home_played = played.get(&home_key).copied().unwrap_or(0);
            let home_remaining = totals[&home_key] - home_played - 1;

            let reason = if !r.has_stats(required) {
                EligibilityReason::StatsMissing
            } else if home_played < MIN_WINDOW {
                EligibilityReason::HomeTeamFewerThan7Played
            } else if home_remaining < MIN_WINDOW {
                EligibilityReason::HomeTeamFewerThan7Remaining
            } else if first_stat_season == Some(r.season.as_str()) {
                EligibilityReason::FirstSeasonOfLeague
            } else {
                EligibilityReason::Ok
            };
            flags[i] = EligibilityFlag::from_reason(reason);

            *played.entry(home_key).or_default() += 1;
            *played.entry((r.season.as_str(), r.away_team.as_str())).or_default() += 1;
        }
    }
    flags
}
