//! Best-price odds aggregation and overround computation.

use crate::data::{MatchRecord, OddsSummary};
use crate::error::{Error, Result};

/// Sum of implied probabilities minus one.
///
/// Positive values are the bookmaker margin; a negative value means the
/// prices jointly imply less than certainty and admit an arbitrage.
pub fn overround(odds: &[f64]) -> f64 {
    odds.iter().map(|o| 1.0 / o).sum::<f64>() - 1.0
}

/// Take the maximum odds per outcome across a match's valid bookmaker
/// quotes and derive implied probabilities and the overround of those
/// maxima. Errors when no valid quote exists.
pub fn best_odds(record: &MatchRecord) -> Result<OddsSummary> {
    let mut max_home = f64::NEG_INFINITY;
    let mut max_draw = f64::NEG_INFINITY;
    let mut max_away = f64::NEG_INFINITY;
    let mut any = false;
    for quote in record.valid_odds() {
        any = true;
        max_home = max_home.max(quote.home);
        max_draw = max_draw.max(quote.draw);
        max_away = max_away.max(quote.away);
    }
    if !any {
        return Err(Error::not_enough(format!(
            "no valid bookmaker odds for {}",
            record.match_id()
        )));
    }
    Ok(OddsSummary {
        max_home,
        max_draw,
        max_away,
        implied_home: 1.0 / max_home,
        implied_draw: 1.0 / max_draw,
        implied_away: 1.0 / max_away,
        overround: overround(&[max_home, max_draw, max_away]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::BookmakerOdds;
    use crate::types::Outcome;
    use approx::assert_abs_diff_eq;
    use chrono::NaiveDate;

    fn record_with_odds(odds: Vec<BookmakerOdds>) -> MatchRecord {
        MatchRecord {
            league_id: "E0".into(),
            season: "2004-05".into(),
            date: NaiveDate::from_ymd_opt(2004, 8, 14).unwrap(),
            home_team: "A".into(),
            away_team: "B".into(),
            home_goals: 1,
            away_goals: 0,
            outcome: Outcome::HomeWin,
            home_shots_on_target: None,
            away_shots_on_target: None,
            home_shots_off_target: None,
            away_shots_off_target: None,
            home_corners: None,
            away_corners: None,
            odds,
        }
    }

    fn quote(b: &str, h: f64, d: f64, a: f64) -> BookmakerOdds {
        BookmakerOdds {
            bookmaker: b.into(),
            home: h,
            draw: d,
            away: a,
        }
    }

    #[test]
    fn two_outcome_overround_example() {
        // Odds of 3.0 and 1.4 imply 1/3 and 5/7, an overround of 1/21.
        assert_abs_diff_eq!(overround(&[3.0, 1.4]), 0.047619047619, epsilon = 1e-9);
    }

    #[test]
    fn fair_odds_have_zero_overround() {
        assert_abs_diff_eq!(overround(&[2.0, 2.0]), 0.0, epsilon = 1e-12);
        assert!(overround(&[2.1, 2.1]) < 0.0);
    }

    #[test]
    fn best_odds_takes_per_outcome_maxima() {
        let record = record_with_odds(vec![
            quote("B365", 2.2, 3.1, 3.9),
            quote("WH", 2.1, 3.4, 4.0),
            quote("VC", 2.0, 3.3, 3.8),
        ]);
        let summary = best_odds(&record).unwrap();
        assert_eq!(summary.max_home, 2.2);
        assert_eq!(summary.max_draw, 3.4);
        assert_eq!(summary.max_away, 4.0);
        assert_abs_diff_eq!(summary.implied_home, 1.0 / 2.2, epsilon = 1e-12);
        assert_abs_diff_eq!(
            summary.overround,
            1.0 / 2.2 + 1.0 / 3.4 + 1.0 / 4.0 - 1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn invalid_quotes_are_ignored() {
        let record = record_with_odds(vec![
            quote("SB", 1.0, 3.0, 9.0),
            quote("WH", 2.5, 3.2, 2.9),
        ]);
        let summary = best_odds(&record).unwrap();
        assert_eq!(summary.max_home, 2.5);
        assert!(best_odds(&record_with_odds(vec![])).is_err());
        assert!(best_odds(&record_with_odds(vec![quote("SB", 0.9, 1.0, -2.0)])).is_err());
    }

    proptest::proptest! {
        #[test]
        fn overround_sign_matches_probability_mass(
            odds in proptest::collection::vec(1.01f64..50.0, 2..4)
        ) {
            let total: f64 = odds.iter().map(|o| 1.0 / o).sum();
            let ov = overround(&odds);
            proptest::prop_assert!((ov - (total - 1.0)).abs() < 1e-12);
        }
    }
}
