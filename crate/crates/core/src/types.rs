//! Core enums used throughout the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A per-team match statistic tracked by the rating system.
///
/// The declaration order is the canonical ordering used for feature vectors
/// and report rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Goals,
    ShotsOnTarget,
    ShotsOffTarget,
    Corners,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Statistic::Goals,
        Statistic::ShotsOnTarget,
        Statistic::ShotsOffTarget,
        Statistic::Corners,
    ];

    /// Stable index into per-statistic arrays, following `ALL`.
    pub fn index(self) -> usize {
        match self {
            Statistic::Goals => 0,
            Statistic::ShotsOnTarget => 1,
            Statistic::ShotsOffTarget => 2,
            Statistic::Corners => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Statistic::Goals => "goals",
            Statistic::ShotsOnTarget => "shots_on_target",
            Statistic::ShotsOffTarget => "shots_off_target",
            Statistic::Corners => "corners",
        }
    }

    /// Short label used in combination names and compact reports.
    pub fn short_label(self) -> &'static str {
        match self {
            Statistic::Goals => "g",
            Statistic::ShotsOnTarget => "on",
            Statistic::ShotsOffTarget => "off",
            Statistic::Corners => "cor",
        }
    }

    pub fn parse(s: &str) -> Result<Statistic> {
        match s.trim().to_ascii_lowercase().as_str() {
            "goals" | "g" => Ok(Statistic::Goals),
            "shots_on_target" | "sot" | "on" => Ok(Statistic::ShotsOnTarget),
            "shots_off_target" | "soff" | "off" => Ok(Statistic::ShotsOffTarget),
            "corners" | "cor" => Ok(Statistic::Corners),
            other => Err(Error::invalid(format!("unknown statistic {other:?}"))),
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Home or away, for statistics and bet sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Home,
    Away,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Home => "home",
            Side::Away => "away",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Full-time result from the home side's perspective.
///
/// The ordering `HomeWin > Draw > AwayWin` is the ordinal scale used by the
/// outcome models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "H")]
    HomeWin,
    #[serde(rename = "D")]
    Draw,
    #[serde(rename = "A")]
    AwayWin,
}

impl Outcome {
    pub fn from_goals(home: u32, away: u32) -> Outcome {
        match home.cmp(&away) {
            std::cmp::Ordering::Greater => Outcome::HomeWin,
            std::cmp::Ordering::Equal => Outcome::Draw,
            std::cmp::Ordering::Less => Outcome::AwayWin,
        }
    }

    pub fn parse(s: &str) -> Result<Outcome> {
        match s.trim() {
            "H" => Ok(Outcome::HomeWin),
            "D" => Ok(Outcome::Draw),
            "A" => Ok(Outcome::AwayWin),
            other => Err(Error::format(format!("unknown result code {other:?}"))),
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Outcome::HomeWin => "H",
            Outcome::Draw => "D",
            Outcome::AwayWin => "A",
        }
    }

    /// Index on the ordinal scale: home win 0, draw 1, away win 2.
    pub fn rank(self) -> usize {
        match self {
            Outcome::HomeWin => 0,
            Outcome::Draw => 1,
            Outcome::AwayWin => 2,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}
