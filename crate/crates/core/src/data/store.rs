//! The canonical on-disk match store.
//!
//! A store is the unit every downstream stage consumes: the date-sorted
//! match records with their eligibility flags, plus a season table holding
//! per-league membership, promotion/relegation classification of arriving
//! teams, and the donor sets used to seed arrivals' ratings. All of it is
//! derived once at build time from the full dataset, so truncating a store
//! to a cutoff date only drops later records and never changes anything
//! about earlier ones.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::{compute_eligibility, EligibilityFlag, EligibilityReason, MatchRecord};
use crate::error::{Error, Result};
use crate::ratings::ArrivalKind;
use crate::types::Statistic;

const RECORDS_FILE: &str = "store.jsonl";
const SEASONS_FILE: &str = "seasons.json";

/// Country and tier of a league, for cross-division team tracking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeagueLevel {
    pub country: String,
    pub tier: u32,
}

/// One league season: who played in it and how the squad changed relative
/// to the previous season of the same league.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonInfo {
    pub season: String,
    pub teams: BTreeSet<String>,
    /// Teams not present the season before, with their origin.
    pub arrivals: BTreeMap<String, ArrivalKind>,
    /// Teams that left for a higher division of the same country.
    pub promoted_out: BTreeSet<String>,
    /// Teams that left for a lower division of the same country.
    pub relegated_out: BTreeSet<String>,
}

/// Season sequences for every league, in chronological order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeasonTable {
    pub leagues: BTreeMap<String, Vec<SeasonInfo>>,
}

impl SeasonTable {
    /// Derive the table from date-sorted records. `levels` supplies country
    /// and tier per league; leagues without an entry get every arrival
    /// classified as unknown and no donor sets.
    pub fn build(records: &[MatchRecord], levels: &BTreeMap<String, LeagueLevel>) -> SeasonTable {
        // Membership per league, seasons in first-appearance order.
        let mut membership: BTreeMap<String, Vec<(String, BTreeSet<String>)>> = BTreeMap::new();
        for r in records {
            let seasons = membership.entry(r.league_id.clone()).or_default();
            if seasons.last().map(|(s, _)| s != &r.season).unwrap_or(true) {
                if let Some(pos) = seasons.iter().position(|(s, _)| s == &r.season) {
                    // Interleaved dates across seasons should not happen in
                    // sorted input, but tolerate them.
                    let teams = &mut seasons[pos].1;
                    teams.insert(r.home_team.clone());
                    teams.insert(r.away_team.clone());
                    continue;
                }
                seasons.push((r.season.clone(), BTreeSet::new()));
            }
            let teams = &mut seasons.last_mut().expect("just pushed").1;
            teams.insert(r.home_team.clone());
            teams.insert(r.away_team.clone());
        }

        // Where did this team play in that season, among comparable
        // leagues (same country, known tier, different league)?
        let locate = |team: &str, season: &str, not_league: &str| -> Option<&LeagueLevel> {
            for (league, seasons) in &membership {
                if league == not_league {
                    continue;
                }
                let Some(level) = levels.get(league) else { continue };
                if seasons
                    .iter()
                    .any(|(s, teams)| s == season && teams.contains(team))
                {
                    return Some(level);
                }
            }
            None
        };

        let mut table = SeasonTable::default();
        for (league, seasons) in &membership {
            let own_level = levels.get(league);
            let mut infos: Vec<SeasonInfo> = Vec::with_capacity(seasons.len());
            for (k, (season, teams)) in seasons.iter().enumerate() {
                let mut info = SeasonInfo {
                    season: season.clone(),
                    teams: teams.clone(),
                    arrivals: BTreeMap::new(),
                    promoted_out: BTreeSet::new(),
                    relegated_out: BTreeSet::new(),
                };
                if k > 0 {
                    let (prev_season, prev_teams) = &seasons[k - 1];
                    for team in teams.difference(prev_teams) {
                        let kind = match (own_level, own_level.and_then(|own| {
                            locate(team, prev_season, league)
                                .filter(|l| l.country == own.country)
                        })) {
                            (Some(own), Some(origin)) if origin.tier < own.tier => {
                                ArrivalKind::RelegatedIn
                            }
                            (Some(own), Some(origin)) if origin.tier > own.tier => {
                                ArrivalKind::PromotedIn
                            }
                            _ => ArrivalKind::Unknown,
                        };
                        info.arrivals.insert(team.clone(), kind);
                    }
                    for team in prev_teams.difference(teams) {
                        let destination = own_level.and_then(|own| {
                            locate(team, season, league).filter(|l| l.country == own.country)
                        });
                        match (own_level, destination) {
                            (Some(own), Some(dest)) if dest.tier < own.tier => {
                                info.promoted_out.insert(team.clone());
                            }
                            (Some(own), Some(dest)) if dest.tier > own.tier => {
                                info.relegated_out.insert(team.clone());
                            }
                            _ => {}
                        }
                    }
                }
                infos.push(info);
            }
            table.leagues.insert(league.clone(), infos);
        }
        table
    }

    pub fn league(&self, league_id: &str) -> Option<&[SeasonInfo]> {
        self.leagues.get(league_id).map(|v| v.as_slice())
    }

    pub fn info(&self, league_id: &str, season: &str) -> Option<&SeasonInfo> {
        self.leagues
            .get(league_id)?
            .iter()
            .find(|info| info.season == season)
    }
}

/// Records, eligibility flags and season table, as persisted on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchStore {
    pub records: Vec<MatchRecord>,
    pub flags: Vec<EligibilityFlag>,
    pub seasons: SeasonTable,
    /// Statistics the eligibility flags were computed against.
    pub required_stats: Vec<Statistic>,
}

#[derive(Serialize, Deserialize)]
struct StoreLine {
    #[serde(flatten)]
    record: MatchRecord,
    eligible: bool,
    reason: EligibilityReason,
}

#[derive(Serialize, Deserialize)]
struct SeasonsFile {
    required_stats: Vec<Statistic>,
    #[serde(flatten)]
    seasons: SeasonTable,
}

impl MatchStore {
    /// Assemble a store from raw records. Records are date-sorted (stable,
    /// so same-day input order is preserved) before flags and the season
    /// table are derived.
    pub fn build(
        mut records: Vec<MatchRecord>,
        required: &[Statistic],
        levels: &BTreeMap<String, LeagueLevel>,
    ) -> MatchStore {
        records.sort_by_key(|r| r.date);
        let flags = compute_eligibility(&records, required);
        let seasons = SeasonTable::build(&records, levels);
        MatchStore {
            records,
            flags,
            seasons,
            required_stats: required.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter_with_flags(&self) -> impl Iterator<Item = (&MatchRecord, &EligibilityFlag)> {
        self.records.iter().zip(self.flags.iter())
    }

    /// Drop every record after the cutoff date. Flags and the season table
    /// are untouched, so forecasts for retained matches are unchanged.
    pub fn truncate(&self, cutoff: NaiveDate) -> MatchStore {
        let mut records = Vec::new();
        let mut flags = Vec::new();
        for (r, f) in self.iter_with_flags() {
            if r.date <= cutoff {
                records.push(r.clone());
                flags.push(*f);
            }
        }
        MatchStore {
            records,
            flags,
            seasons: self.seasons.clone(),
            required_stats: self.required_stats.clone(),
        }
    }

    /// Write `store.jsonl` (one record per line with its flag) and
    /// `seasons.json` into a directory.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut out = BufWriter::new(std::fs::File::create(dir.join(RECORDS_FILE))?);
        for (record, flag) in self.iter_with_flags() {
            let line = StoreLine {
                record: record.clone(),
                eligible: flag.eligible,
                reason: flag.reason,
            };
            let json = serde_json::to_string(&line)
                .map_err(|e| Error::format(format!("serialize record: {e}")))?;
            out.write_all(json.as_bytes())?;
            out.write_all(b"\n")?;
        }
        out.flush()?;

        let seasons = SeasonsFile {
            required_stats: self.required_stats.clone(),
            seasons: self.seasons.clone(),
        };
        let json = serde_json::to_string_pretty(&seasons)
            .map_err(|e| Error::format(format!("serialize seasons: {e}")))?;
        std::fs::write(dir.join(SEASONS_FILE), json + "\n")?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<MatchStore> {
        let records_path = dir.join(RECORDS_FILE);
        let file = std::fs::File::open(&records_path)
            .map_err(|e| Error::invalid(format!("cannot open {}: {e}", records_path.display())))?;
        let mut records = Vec::new();
        let mut flags = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: StoreLine = serde_json::from_str(&line).map_err(|e| {
                Error::format(format!("{}: line {}: {e}", records_path.display(), i + 1))
            })?;
            records.push(parsed.record);
            flags.push(EligibilityFlag {
                eligible: parsed.eligible,
                reason: parsed.reason,
            });
        }

        let seasons_path = dir.join(SEASONS_FILE);
        let text = std::fs::read_to_string(&seasons_path)
            .map_err(|e| Error::invalid(format!("cannot open {}: {e}", seasons_path.display())))?;
        let seasons: SeasonsFile = serde_json::from_str(&text)
            .map_err(|e| Error::format(format!("{}: {e}", seasons_path.display())))?;
        Ok(MatchStore {
            records,
            flags,
            seasons: seasons.seasons,
            required_stats: seasons.required_stats,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Outcome;

    fn mk(league: &str, season: &str, day: u32, home: &str, away: &str) -> MatchRecord {
        let year: i32 = season[0..4].parse().unwrap();
        let date = NaiveDate::from_ymd_opt(year, 9, 1).unwrap() + chrono::Days::new(u64::from(day));
        MatchRecord {
            league_id: league.into(),
            season: season.into(),
            date,
            home_team: home.into(),
            away_team: away.into(),
            home_goals: 2,
            away_goals: 0,
            outcome: Outcome::HomeWin,
            home_shots_on_target: Some(6),
            away_shots_on_target: Some(2),
            home_shots_off_target: Some(5),
            away_shots_off_target: Some(4),
            home_corners: Some(7),
            away_corners: Some(1),
            odds: vec![],
        }
    }

    fn levels() -> BTreeMap<String, LeagueLevel> {
        [
            ("X".to_string(), LeagueLevel { country: "Albion".into(), tier: 1 }),
            ("Y".to_string(), LeagueLevel { country: "Albion".into(), tier: 2 }),
        ]
        .into_iter()
        .collect()
    }

    /// Two tiers, one swap between seasons: C drops from X to Y, D climbs
    /// from Y to X, and a brand-new team N joins Y.
    fn two_tier_records() -> Vec<MatchRecord> {
        vec![
            mk("X", "2000-01", 0, "A", "B"),
            mk("X", "2000-01", 1, "C", "A"),
            mk("Y", "2000-01", 0, "D", "E"),
            mk("Y", "2000-01", 1, "F", "D"),
            mk("X", "2001-02", 0, "A", "D"),
            mk("X", "2001-02", 1, "B", "A"),
            mk("Y", "2001-02", 0, "C", "E"),
            mk("Y", "2001-02", 1, "F", "N"),
        ]
    }

    #[test]
    fn season_table_classifies_promotion_and_relegation() {
        let records = two_tier_records();
        let table = SeasonTable::build(&records, &levels());

        let x2 = table.info("X", "2001-02").unwrap();
        assert_eq!(x2.arrivals.get("D"), Some(&ArrivalKind::PromotedIn));
        assert!(x2.relegated_out.contains("C"));
        assert!(x2.promoted_out.is_empty());

        let y2 = table.info("Y", "2001-02").unwrap();
        assert_eq!(y2.arrivals.get("C"), Some(&ArrivalKind::RelegatedIn));
        assert_eq!(y2.arrivals.get("N"), Some(&ArrivalKind::Unknown));
        assert!(y2.promoted_out.contains("D"));

        let x1 = table.info("X", "2000-01").unwrap();
        assert!(x1.arrivals.is_empty());
        assert_eq!(
            x1.teams,
            ["A", "B", "C"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn unknown_league_levels_leave_arrivals_unclassified() {
        let records = two_tier_records();
        let table = SeasonTable::build(&records, &BTreeMap::new());
        let x2 = table.info("X", "2001-02").unwrap();
        assert_eq!(x2.arrivals.get("D"), Some(&ArrivalKind::Unknown));
        assert!(x2.relegated_out.is_empty());
    }

    #[test]
    fn store_round_trips_through_disk() {
        let store = MatchStore::build(
            two_tier_records(),
            &[Statistic::ShotsOnTarget, Statistic::Corners],
            &levels(),
        );
        let dir = tempfile::tempdir().unwrap();
        store.save(dir.path()).unwrap();
        let loaded = MatchStore::load(dir.path()).unwrap();
        assert_eq!(store, loaded);

        // Saving the loaded store reproduces the files byte for byte.
        let dir2 = tempfile::tempdir().unwrap();
        loaded.save(dir2.path()).unwrap();
        let a = std::fs::read(dir.path().join("store.jsonl")).unwrap();
        let b = std::fs::read(dir2.path().join("store.jsonl")).unwrap();
        assert_eq!(a, b);
        let a = std::fs::read(dir.path().join("seasons.json")).unwrap();
        let b = std::fs::read(dir2.path().join("seasons.json")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truncation_only_drops_later_records() {
        let store = MatchStore::build(two_tier_records(), &[Statistic::Goals], &levels());
        let cutoff = NaiveDate::from_ymd_opt(2001, 9, 1).unwrap();
        let truncated = store.truncate(cutoff);
        assert!(truncated.len() < store.len());
        assert_eq!(truncated.seasons, store.seasons);
        for (i, (r, f)) in truncated.iter_with_flags().enumerate() {
            assert!(r.date <= cutoff);
            assert_eq!(r, &store.records[i]);
            assert_eq!(f, &store.flags[i]);
        }
    }

    #[test]
    fn build_sorts_by_date() {
        let mut records = two_tier_records();
        records.reverse();
        let store = MatchStore::build(records, &[Statistic::Goals], &levels());
        for pair in store.records.windows(2) {
            assert!(pair[0].date <= pair[1].date);
        }
    }
}
