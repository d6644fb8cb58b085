//! Parsing of raw league result CSVs into canonical match records.
//!
//! Files follow the football-data.co.uk convention: one file per league and
//! season, one row per match, with a header naming the columns. Header
//! vocabularies differ across years, so column lookup goes through the
//! synonym lists in `IngestConfig`. Malformed rows are skipped with a
//! warning rather than failing the file; a missing or unrecognizable header
//! is a format error.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use log::warn;

use crate::data::{BookmakerOdds, IngestConfig, MatchRecord};
use crate::error::{Error, Result};
use crate::types::Outcome;

/// Season label (`YYYY-YY`) containing a date, with seasons running from
/// July to June.
pub fn season_label_of_date(date: NaiveDate) -> String {
    let start_year = if date.month() >= 7 {
        date.year()
    } else {
        date.year() - 1
    };
    format!("{start_year}-{:02}", (start_year + 1) % 100)
}

/// First and last day of a season's July-to-June window.
pub fn season_window(season: &str) -> Option<(NaiveDate, NaiveDate)> {
    let start_year: i32 = season.get(0..4)?.parse().ok()?;
    let start = NaiveDate::from_ymd_opt(start_year, 7, 1)?;
    let end = NaiveDate::from_ymd_opt(start_year + 1, 6, 30)?;
    Some((start, end))
}

/// Normalize a season spelled either `YYYY-YY` or as four digits (`0405`,
/// `9900`). Two-digit years at or above 93 are read as 19xx; the data
/// convention starts with the 1993-94 season.
pub fn normalize_season(raw: &str) -> Option<String> {
    let s = raw.trim();
    if s.len() == 7 && s.as_bytes()[4] == b'-' {
        let start: i32 = s[0..4].parse().ok()?;
        let end: u32 = s[5..7].parse().ok()?;
        if (start + 1).rem_euclid(100) as u32 == end {
            return Some(s.to_string());
        }
        return None;
    }
    if s.len() == 4 && s.bytes().all(|b| b.is_ascii_digit()) {
        let a: u32 = s[0..2].parse().ok()?;
        let b: u32 = s[2..4].parse().ok()?;
        if (a + 1) % 100 != b {
            return None;
        }
        let start_year = if a >= 93 { 1900 + a } else { 2000 + a };
        return Some(format!("{start_year}-{b:02}"));
    }
    None
}

/// Infer the season from a file path whose directory or stem names it,
/// e.g. `data/0405/E0.csv` or `data/2004-05/E0.csv`. The component nearest
/// the file wins.
pub fn infer_season_from_path(path: &Path) -> Option<String> {
    let mut components: Vec<String> = path
        .components()
        .filter_map(|c| c.as_os_str().to_str().map(|s| s.to_string()))
        .collect();
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        if let Some(last) = components.last_mut() {
            *last = stem.to_string();
        }
    }
    components
        .iter()
        .rev()
        .find_map(|c| normalize_season(c))
}

fn parse_date(raw: &str) -> Option<NaiveDate> {
    // Dates are dd/mm/yyyy in recent files and dd/mm/yy in older ones;
    // two-digit years from 69 on mean 19xx.
    let s = raw.trim();
    match s.rsplit('/').next()?.len() {
        4 => NaiveDate::parse_from_str(s, "%d/%m/%Y").ok(),
        2 => NaiveDate::parse_from_str(s, "%d/%m/%y").ok(),
        _ => None,
    }
}

struct HeaderMap {
    by_name: HashMap<String, usize>,
}

impl HeaderMap {
    fn new(headers: &csv::StringRecord) -> HeaderMap {
        let mut by_name = HashMap::new();
        for (i, name) in headers.iter().enumerate() {
            let clean = name.trim_start_matches('\u{feff}').trim().to_string();
            // First occurrence wins on duplicated headers.
            by_name.entry(clean).or_insert(i);
        }
        HeaderMap { by_name }
    }

    fn find(&self, synonyms: &[String]) -> Option<usize> {
        synonyms.iter().find_map(|s| self.by_name.get(s).copied())
    }

    fn get(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }
}

fn field<'a>(row: &'a csv::StringRecord, idx: Option<usize>) -> Option<&'a str> {
    let value = row.get(idx?)?.trim();
    if value.is_empty() {
        None
    } else {
        Some(value)
    }
}

fn parse_u32(row: &csv::StringRecord, idx: Option<usize>) -> Option<u32> {
    // Some files carry counts as "3.0"; accept any numeric spelling of an
    // exact non-negative integer.
    let raw = field(row, idx)?;
    let value: f64 = raw.parse().ok()?;
    if value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Some(value as u32)
    } else {
        None
    }
}

fn parse_f64(row: &csv::StringRecord, idx: Option<usize>) -> Option<f64> {
    field(row, idx)?.parse().ok()
}

/// Parse one league CSV file. The season override, when given, applies to
/// every row; otherwise the season is inferred from the file path, falling
/// back to each row's date.
pub fn parse_league_csv(
    path: &Path,
    league_id: &str,
    config: &IngestConfig,
    season_override: Option<&str>,
) -> Result<Vec<MatchRecord>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())))?;
    let season = match season_override {
        Some(s) => Some(normalize_season(s).ok_or_else(|| {
            Error::invalid(format!("cannot interpret season override {s:?}"))
        })?),
        None => infer_season_from_path(path),
    };
    parse_league_reader(
        file,
        league_id,
        config,
        season.as_deref(),
        &path.display().to_string(),
    )
}

/// Parse league CSV content from any reader. `season` fixes the season for
/// all rows; `None` derives it from each row's date.
pub fn parse_league_reader<R: Read>(
    reader: R,
    league_id: &str,
    config: &IngestConfig,
    season: Option<&str>,
    source: &str,
) -> Result<Vec<MatchRecord>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::format(format!("{source}: cannot read header: {e}")))?
        .clone();
    let map = HeaderMap::new(&headers);

    let cols = &config.columns;
    let idx_date = map.find(&cols.date);
    let idx_home = map.find(&cols.home_team);
    let idx_away = map.find(&cols.away_team);
    let idx_hg = map.find(&cols.home_goals);
    let idx_ag = map.find(&cols.away_goals);
    if idx_date.is_none() || idx_home.is_none() || idx_away.is_none() {
        return Err(Error::format(format!(
            "{source}: no recognizable date/team header (saw: {})",
            headers.iter().take(12).collect::<Vec<_>>().join(",")
        )));
    }
    if idx_hg.is_none() || idx_ag.is_none() {
        return Err(Error::format(format!("{source}: no full-time goals columns")));
    }
    let idx_result = map.find(&cols.result);
    let idx_hs = map.find(&cols.home_shots);
    let idx_as = map.find(&cols.away_shots);
    let idx_hst = map.find(&cols.home_shots_on_target);
    let idx_ast = map.find(&cols.away_shots_on_target);
    let idx_hc = map.find(&cols.home_corners);
    let idx_ac = map.find(&cols.away_corners);

    let bookmaker_cols: Vec<(String, usize, usize, usize)> = cols
        .bookmakers
        .iter()
        .filter_map(|prefix| {
            let h = map.get(&format!("{prefix}H"))?;
            let d = map.get(&format!("{prefix}D"))?;
            let a = map.get(&format!("{prefix}A"))?;
            Some((prefix.clone(), h, d, a))
        })
        .collect();

    let window = season.and_then(season_window);
    let mut records = Vec::new();
    for (line, row) in csv_reader.records().enumerate() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                warn!("{source}: skipping unreadable row {}: {e}", line + 2);
                continue;
            }
        };
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let Some(date) = field(&row, idx_date).and_then(parse_date) else {
            warn!("{source}: skipping row {} without a parseable date", line + 2);
            continue;
        };
        if let Some((start, end)) = window {
            if date < start || date > end {
                warn!(
                    "{source}: skipping row {}: date {date} outside season {}",
                    line + 2,
                    season.unwrap_or("?")
                );
                continue;
            }
        }
        let (Some(home_raw), Some(away_raw)) = (field(&row, idx_home), field(&row, idx_away))
        else {
            warn!("{source}: skipping row {} without team names", line + 2);
            continue;
        };
        let (Some(home_goals), Some(away_goals)) =
            (parse_u32(&row, idx_hg), parse_u32(&row, idx_ag))
        else {
            warn!("{source}: skipping row {} without full-time goals", line + 2);
            continue;
        };
        let outcome = Outcome::from_goals(home_goals, away_goals);
        if let Some(code) = field(&row, idx_result) {
            if Outcome::parse(code).map(|r| r != outcome).unwrap_or(false) {
                warn!(
                    "{source}: row {}: result column {code:?} disagrees with goals {home_goals}-{away_goals}; trusting goals",
                    line + 2
                );
            }
        }

        // Off-target shots are derived as total shots minus shots on
        // target. A side whose totals are inconsistent gets no shot
        // statistics at all.
        let shots_side = |total: Option<u32>, on: Option<u32>, side: &str| match (total, on) {
            (Some(t), Some(o)) if t >= o => (Some(o), Some(t - o)),
            (Some(t), Some(o)) => {
                warn!(
                    "{source}: row {}: {side} shots {t} below on-target {o}; dropping shot stats",
                    line + 2
                );
                (None, None)
            }
            (_, on) => (on, None),
        };
        let (home_on, home_off) = shots_side(parse_u32(&row, idx_hs), parse_u32(&row, idx_hst), "home");
        let (away_on, away_off) = shots_side(parse_u32(&row, idx_as), parse_u32(&row, idx_ast), "away");

        let mut odds = Vec::new();
        for (bookmaker, h, d, a) in &bookmaker_cols {
            let quote = (
                parse_f64(&row, Some(*h)),
                parse_f64(&row, Some(*d)),
                parse_f64(&row, Some(*a)),
            );
            if let (Some(home), Some(draw), Some(away)) = quote {
                let candidate = BookmakerOdds {
                    bookmaker: bookmaker.clone(),
                    home,
                    draw,
                    away,
                };
                if candidate.is_valid() {
                    odds.push(candidate);
                }
            }
        }

        records.push(MatchRecord {
            league_id: league_id.to_string(),
            season: season
                .map(|s| s.to_string())
                .unwrap_or_else(|| season_label_of_date(date)),
            date,
            home_team: config.canonical_team(league_id, home_raw),
            away_team: config.canonical_team(league_id, away_raw),
            home_goals,
            away_goals,
            outcome,
            home_shots_on_target: home_on,
            away_shots_on_target: away_on,
            home_shots_off_target: home_off,
            away_shots_off_target: away_off,
            home_corners: parse_u32(&row, idx_hc),
            away_corners: parse_u32(&row, idx_ac),
            odds,
        });
    }
    records.sort_by(|a, b| a.date.cmp(&b.date));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn parse(text: &str, season: Option<&str>) -> Vec<MatchRecord> {
        let config = IngestConfig::default_config();
        parse_league_reader(text.as_bytes(), "E0", &config, season, "test.csv").unwrap()
    }

    #[test]
    fn parses_a_complete_row() {
        let text = "\
Div,Date,HomeTeam,AwayTeam,FTHG,FTAG,FTR,HS,AS,HST,AST,HC,AC,B365H,B365D,B365A,WHH,WHD,WHA
E0,14/08/2004,Arsenal,Everton,4,1,H,18,7,11,4,8,2,1.25,5.5,12.0,1.28,5.0,11.0
";
        let records = parse(text, Some("2004-05"));
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.season, "2004-05");
        assert_eq!(r.date, NaiveDate::from_ymd_opt(2004, 8, 14).unwrap());
        assert_eq!(r.home_team, "Arsenal");
        assert_eq!((r.home_goals, r.away_goals), (4, 1));
        assert_eq!(r.outcome, Outcome::HomeWin);
        assert_eq!(r.home_shots_on_target, Some(11));
        // Off target = shots minus on target.
        assert_eq!(r.home_shots_off_target, Some(7));
        assert_eq!(r.away_shots_off_target, Some(3));
        assert_eq!(r.home_corners, Some(8));
        assert_eq!(r.odds.len(), 2);
        assert_eq!(r.odds[0].bookmaker, "B365");
        assert_eq!(r.odds[0].away, 12.0);
    }

    #[test]
    fn handles_two_digit_years_missing_stats_and_bad_rows() {
        let text = "\
Div,Date,HomeTeam,AwayTeam,FTHG,FTAG,FTR
E0,19/08/95,Aston Villa,Man United,3,1,H
E0,,Leeds,Liverpool,1,0,H
E0,20/08/95,Wimbledon,Bolton,3,2
,,,,,,
";
        let records = parse(text, None);
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].date, NaiveDate::from_ymd_opt(1995, 8, 19).unwrap());
        assert_eq!(records[0].season, "1995-96");
        assert!(!records[0].has_stat(crate::types::Statistic::ShotsOnTarget));
        assert!(records[0].has_stat(crate::types::Statistic::Goals));
        assert!(records[0].odds.is_empty());
    }

    #[test]
    fn inconsistent_shot_totals_drop_the_side() {
        let text = "\
Date,HomeTeam,AwayTeam,FTHG,FTAG,HS,AS,HST,AST
01/10/2010,A,B,1,0,5,10,9,4
";
        let records = parse(text, None);
        assert_eq!(records[0].home_shots_on_target, None);
        assert_eq!(records[0].home_shots_off_target, None);
        assert_eq!(records[0].away_shots_on_target, Some(4));
        assert_eq!(records[0].away_shots_off_target, Some(6));
    }

    #[test]
    fn odds_at_or_below_one_are_rejected() {
        let text = "\
Date,HomeTeam,AwayTeam,FTHG,FTAG,B365H,B365D,B365A,WHH,WHD,WHA
01/10/2010,A,B,1,0,1.0,5.0,9.0,1.11,6.0,15.0
";
        let records = parse(text, None);
        assert_eq!(records[0].odds.len(), 1);
        assert_eq!(records[0].odds[0].bookmaker, "WH");
    }

    #[test]
    fn rows_outside_the_declared_season_are_skipped() {
        let text = "\
Date,HomeTeam,AwayTeam,FTHG,FTAG
14/08/2004,A,B,1,0
14/08/2010,C,D,2,2
";
        let records = parse(text, Some("2004-05"));
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].home_team, "A");
    }

    #[test]
    fn output_is_date_sorted() {
        let text = "\
Date,HomeTeam,AwayTeam,FTHG,FTAG
20/09/2004,C,D,0,0
14/08/2004,A,B,1,0
";
        let records = parse(text, None);
        assert!(records[0].date < records[1].date);
    }

    #[test]
    fn season_inference_from_paths() {
        assert_eq!(
            infer_season_from_path(&PathBuf::from("data/0405/E0.csv")),
            Some("2004-05".to_string())
        );
        assert_eq!(
            infer_season_from_path(&PathBuf::from("data/9900/SC0.csv")),
            Some("1999-00".to_string())
        );
        assert_eq!(
            infer_season_from_path(&PathBuf::from("raw/2017-18/D1.csv")),
            Some("2017-18".to_string())
        );
        assert_eq!(infer_season_from_path(&PathBuf::from("data/E0.csv")), None);
        // 1234 is four digits but not a consecutive year pair.
        assert_eq!(infer_season_from_path(&PathBuf::from("data/1234/E0.csv")), None);
    }

    #[test]
    fn season_labels_split_years_in_july() {
        let june = NaiveDate::from_ymd_opt(2005, 6, 30).unwrap();
        let july = NaiveDate::from_ymd_opt(2005, 7, 1).unwrap();
        assert_eq!(season_label_of_date(june), "2004-05");
        assert_eq!(season_label_of_date(july), "2005-06");
        assert_eq!(season_label_of_date(NaiveDate::from_ymd_opt(1999, 8, 7).unwrap()), "1999-00");
    }
}
