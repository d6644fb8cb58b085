//! Canonical match records: ingestion from raw league CSVs, odds handling,
//! forecast eligibility and the on-disk store.

pub mod columns;
pub mod csv_parse;
pub mod eligibility;
pub mod odds;
pub mod store;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::types::{Outcome, Statistic};

pub use columns::IngestConfig;
pub use csv_parse::parse_league_csv;
pub use eligibility::compute_eligibility;
pub use odds::{best_odds, overround};
pub use store::{MatchStore, SeasonInfo, SeasonTable};

/// Full-time match odds quoted by one bookmaker, decimal format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookmakerOdds {
    pub bookmaker: String,
    pub home: f64,
    pub draw: f64,
    pub away: f64,
}

impl BookmakerOdds {
    /// Decimal odds must exceed 1 on every outcome to be usable.
    pub fn is_valid(&self) -> bool {
        [self.home, self.draw, self.away]
            .iter()
            .all(|o| o.is_finite() && *o > 1.0)
    }
}

/// One completed match in canonical form.
///
/// Statistics beyond goals are optional because early seasons of several
/// leagues do not report them. Odds hold every bookmaker quote present in
/// the source row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub league_id: String,
    /// Season label in `YYYY-YY` form, e.g. `2004-05`.
    pub season: String,
    pub date: NaiveDate,
    pub home_team: String,
    pub away_team: String,
    pub home_goals: u32,
    pub away_goals: u32,
    pub outcome: Outcome,
    pub home_shots_on_target: Option<u32>,
    pub away_shots_on_target: Option<u32>,
    /// Total shots minus shots on target, when both source columns exist.
    pub home_shots_off_target: Option<u32>,
    pub away_shots_off_target: Option<u32>,
    pub home_corners: Option<u32>,
    pub away_corners: Option<u32>,
    pub odds: Vec<BookmakerOdds>,
}

impl MatchRecord {
    /// Stable identifier: league, date and the two team names.
    pub fn match_id(&self) -> String {
        format!(
            "{}:{}:{}:{}",
            self.league_id, self.date, self.home_team, self.away_team
        )
    }

    pub fn home_stat(&self, stat: Statistic) -> Option<f64> {
        match stat {
            Statistic::Goals => Some(f64::from(self.home_goals)),
            Statistic::ShotsOnTarget => self.home_shots_on_target.map(f64::from),
            Statistic::ShotsOffTarget => self.home_shots_off_target.map(f64::from),
            Statistic::Corners => self.home_corners.map(f64::from),
        }
    }

    pub fn away_stat(&self, stat: Statistic) -> Option<f64> {
        match stat {
            Statistic::Goals => Some(f64::from(self.away_goals)),
            Statistic::ShotsOnTarget => self.away_shots_on_target.map(f64::from),
            Statistic::ShotsOffTarget => self.away_shots_off_target.map(f64::from),
            Statistic::Corners => self.away_corners.map(f64::from),
        }
    }

    pub fn has_stat(&self, stat: Statistic) -> bool {
        self.home_stat(stat).is_some() && self.away_stat(stat).is_some()
    }

    pub fn has_stats(&self, stats: &[Statistic]) -> bool {
        stats.iter().all(|s| self.has_stat(*s))
    }

    /// Bookmaker quotes with all three odds strictly above 1.
    pub fn valid_odds(&self) -> impl Iterator<Item = &BookmakerOdds> {
        self.odds.iter().filter(|o| o.is_valid())
    }
}

/// Why a match is excluded from outcome forecasting, if it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EligibilityReason {
    Ok,
    StatsMissing,
    HomeTeamFewerThan7Played,
    HomeTeamFewerThan7Remaining,
    FirstSeasonOfLeague,
}

/// Forecast eligibility verdict for one match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EligibilityFlag {
    pub eligible: bool,
    pub reason: EligibilityReason,
}

impl EligibilityFlag {
    pub fn from_reason(reason: EligibilityReason) -> EligibilityFlag {
        EligibilityFlag {
            eligible: reason == EligibilityReason::Ok,
            reason,
        }
    }
}

/// Best (maximum) odds across bookmakers with the derived implied
/// probabilities and overround.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddsSummary {
    pub max_home: f64,
    pub max_draw: f64,
    pub max_away: f64,
    pub implied_home: f64,
    pub implied_draw: f64,
    pub implied_away: f64,
    /// Sum of implied probabilities minus one; negative means an arbitrage.
    pub overround: f64,
}
