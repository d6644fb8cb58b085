//! Fitting of rating update parameters.
//!
//! One parameter triple per statistic is chosen by minimizing the summed
//! squared one-step prediction error over a full from-scratch replay of
//! every league. Fitting for a season only sees strictly earlier seasons,
//! and the resulting per-season schedule is what walk-forward forecasting
//! replays under.

pub mod simplex;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::MatchStore;
use crate::error::{Error, Result};
use crate::ratings::RatingParams;
use crate::replay::{extract_histories, replay_history, LeagueStatHistory};
use crate::types::Statistic;

use simplex::Bounds;

/// Squared-error summary of one parameter triple over a replay.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveReport {
    pub params: RatingParams,
    pub sse: f64,
    pub n_matches: u64,
    pub per_league: BTreeMap<String, f64>,
}

/// Summed squared error of home and away one-step predictions over all
/// leagues, replaying each from scratch under `params`. `before_season`
/// restricts to seasons strictly before the label.
pub fn objective(
    store: &MatchStore,
    statistic: Statistic,
    params: &RatingParams,
    before_season: Option<&str>,
) -> Result<ObjectiveReport> {
    let histories = extract_histories(store, statistic, before_season);
    objective_on(&histories, params)
}

fn objective_on(histories: &[LeagueStatHistory], params: &RatingParams) -> Result<ObjectiveReport> {
    params.validate()?;
    let mut per_league = BTreeMap::new();
    let mut sse = 0.0;
    let mut n_matches = 0u64;
    for history in histories {
        let mut league_sse = 0.0;
        replay_history(history, *params, None, |m, prediction| {
            let eh = m.home_value - prediction.home;
            let ea = m.away_value - prediction.away;
            league_sse += eh * eh + ea * ea;
        })?;
        sse += league_sse;
        n_matches += history.matches.len() as u64;
        per_league.insert(history.league_id.clone(), league_sse);
    }
    Ok(ObjectiveReport {
        params: *params,
        sse,
        n_matches,
        per_league,
    })
}

/// Outcome of one parameter search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub params: RatingParams,
    pub sse: f64,
    pub n_matches: u64,
    /// Best point of the coarse grid stage, before local refinement.
    pub grid_params: RatingParams,
    pub grid_sse: f64,
    pub refine_iterations: usize,
}

pub const DEFAULT_SEED_PARAMS: RatingParams = RatingParams {
    lambda: 0.1,
    phi1: 0.5,
    phi2: 0.5,
};

fn grid_points() -> Vec<RatingParams> {
    let mut points = Vec::with_capacity(250);
    for i in 0..10 {
        let lambda = 0.05 + 0.1 * i as f64;
        for j in 0..5 {
            let phi1 = 0.1 + 0.2 * j as f64;
            for k in 0..5 {
                let phi2 = 0.1 + 0.2 * k as f64;
                points.push(RatingParams { lambda, phi1, phi2 });
            }
        }
    }
    points
}

/// Coarse grid search followed by simplex refinement inside the box
/// `lambda > 0`, `0 < phi < 1`. The returned squared error is never above
/// the best grid point or the seed.
pub fn optimize(
    store: &MatchStore,
    statistic: Statistic,
    before_season: Option<&str>,
    seed: Option<RatingParams>,
) -> Result<OptimizeResult> {
    let histories = extract_histories(store, statistic, before_season);
    optimize_on(&histories, statistic, seed)
}

fn optimize_on(
    histories: &[LeagueStatHistory],
    statistic: Statistic,
    seed: Option<RatingParams>,
) -> Result<OptimizeResult> {
    let n_matches: u64 = histories.iter().map(|h| h.matches.len() as u64).sum();
    if n_matches == 0 {
        return Err(Error::not_enough(format!(
            "no matches with {statistic} to fit parameters on"
        )));
    }

    let mut candidates = vec![seed.unwrap_or(DEFAULT_SEED_PARAMS)];
    candidates.extend(grid_points());
    let evaluated: Vec<(usize, f64)> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let value = objective_on(histories, p).map(|r| r.sse).unwrap_or(f64::INFINITY);
            (i, value)
        })
        .collect();
    let (best_idx, grid_sse) = evaluated
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("candidate list is non-empty");
    let grid_params = candidates[best_idx];

    let bounds = Bounds::new(vec![1e-6, 1e-6, 1e-6], vec![10.0, 1.0 - 1e-6, 1.0 - 1e-6]);
    let start = [grid_params.lambda, grid_params.phi1, grid_params.phi2];
    let refined = simplex::minimize(
        |x| {
            let p = RatingParams {
                lambda: x[0],
                phi1: x[1],
                phi2: x[2],
            };
            objective_on(histories, &p).map(|r| r.sse).unwrap_or(f64::INFINITY)
        },
        &start,
        &[0.05, 0.1, 0.1],
        &bounds,
        200,
        1e-6,
    );

    let (params, sse) = if refined.value < grid_sse {
        (
            RatingParams {
                lambda: refined.x[0],
                phi1: refined.x[1],
                phi2: refined.x[2],
            },
            refined.value,
        )
    } else {
        (grid_params, grid_sse)
    };
    Ok(OptimizeResult {
        params,
        sse,
        n_matches,
        grid_params,
        grid_sse,
        refine_iterations: refined.iterations,
    })
}

/// Fitted parameters for one statistic and target season.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub params: RatingParams,
    /// Training squared error achieved by the fit.
    pub sse: f64,
    pub n_matches: u64,
}

/// Per-season parameter triples for each statistic.
///
/// The entry for season `s` was fitted on seasons strictly before `s`; a
/// league's or statistic's first season has no entry because there is
/// nothing to fit on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSchedule {
    entries: BTreeMap<(Statistic, String), ScheduleEntry>,
}

impl ParamSchedule {
    pub fn insert(&mut self, statistic: Statistic, season: &str, entry: ScheduleEntry) {
        self.entries.insert((statistic, season.to_string()), entry);
    }

    pub fn get(&self, statistic: Statistic, season: &str) -> Option<&ScheduleEntry> {
        self.entries.get(&(statistic, season.to_string()))
    }

    pub fn params_for(&self, statistic: Statistic, season: &str) -> Option<RatingParams> {
        self.get(statistic, season).map(|e| e.params)
    }

    /// Latest entry whose season label is at or before the given one.
    pub fn latest_at_or_before(
        &self,
        statistic: Statistic,
        season: &str,
    ) -> Option<(&str, RatingParams)> {
        self.entries
            .range(
                (statistic, String::new())..=(statistic, season.to_string()),
            )
            .next_back()
            .map(|((_, s), e)| (s.as_str(), e.params))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Statistic, &str, &ScheduleEntry)> {
        self.entries.iter().map(|((stat, season), e)| (*stat, season.as_str(), e))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["statistic", "season", "lambda", "phi1", "phi2", "sse", "n_matches"])
            .map_err(|e| Error::format(e.to_string()))?;
        for (stat, season, entry) in self.iter() {
            w.write_record([
                stat.label(),
                season,
                &entry.params.lambda.to_string(),
                &entry.params.phi1.to_string(),
                &entry.params.phi2.to_string(),
                &entry.sse.to_string(),
                &entry.n_matches.to_string(),
            ])
            .map_err(|e| Error::format(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<ParamSchedule> {
        let mut reader = csv::Reader::from_reader(input);
        let mut schedule = ParamSchedule::default();
        for (i, row) in reader.deserialize::<ScheduleRow>().enumerate() {
            let row = row.map_err(|e| Error::format(format!("schedule row {}: {e}", i + 2)))?;
            let statistic = Statistic::parse(&row.statistic)?;
            let params = RatingParams::new(row.lambda, row.phi1, row.phi2)?;
            schedule.insert(
                statistic,
                &row.season,
                ScheduleEntry {
                    params,
                    sse: row.sse,
                    n_matches: row.n_matches,
                },
            );
        }
        Ok(schedule)
    }
}

#[derive(Deserialize)]
struct ScheduleRow {
    statistic: String,
    season: String,
    lambda: f64,
    phi1: f64,
    phi2: f64,
    sse: f64,
    n_matches: u64,
}

/// Fit the full between-season schedule: for every season with earlier
/// data for a statistic, optimize on those earlier seasons, warm-starting
/// from the previous season's fit.
pub fn schedule_params(store: &MatchStore, stats: &[Statistic]) -> Result<ParamSchedule> {
    let mut schedule = ParamSchedule::default();
    for &stat in stats {
        let mut seasons: Vec<String> = store
            .records
            .iter()
            .filter(|r| r.has_stat(stat))
            .map(|r| r.season.clone())
            .collect();
        seasons.sort();
        seasons.dedup();

        let mut seed = None;
        for season in seasons.iter().skip(1) {
            let histories = extract_histories(store, stat, Some(season));
            let result = optimize_on(&histories, stat, seed)?;
            seed = Some(result.params);
            schedule.insert(
                stat,
                season,
                ScheduleEntry {
                    params: result.params,
                    sse: result.sse,
                    n_matches: result.n_matches,
                },
            );
        }
    }
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::store::LeagueLevel;
    use crate::data::MatchRecord;
    use crate::types::Outcome;
    use chrono::NaiveDate;

    fn mk(league: &str, season: &str, day: u32, home: &str, away: &str, v: (u32, u32)) -> MatchRecord {
        let year: i32 = season[0..4].parse().unwrap();
        MatchRecord {
            league_id: league.into(),
            season: season.into(),
            date: NaiveDate::from_ymd_opt(year, 9, 1).unwrap() + chrono::Days::new(u64::from(day)),
            home_team: home.into(),
            away_team: away.into(),
            home_goals: v.0.min(9),
            away_goals: v.1.min(9),
            outcome: Outcome::from_goals(v.0.min(9), v.1.min(9)),
            home_shots_on_target: Some(v.0),
            away_shots_on_target: Some(v.1),
            home_shots_off_target: Some(v.0 + 1),
            away_shots_off_target: Some(v.1 + 1),
            home_corners: Some(v.0 + 2),
            away_corners: Some(v.1 + 2),
            odds: vec![],
        }
    }

    fn no_levels() -> BTreeMap<String, LeagueLevel> {
        BTreeMap::new()
    }

    #[test]
    fn zero_lambda_objective_is_sum_of_squared_values() {
        // Frozen ratings stay at zero, so every prediction is zero and the
        // objective is the raw sum of squares.
        let store = MatchStore::build(
            vec![
                mk("L", "2000-01", 0, "A", "B", (10, 4)),
                mk("L", "2000-01", 7, "B", "A", (6, 2)),
            ],
            &[Statistic::ShotsOnTarget],
            &no_levels(),
        );
        let params = RatingParams { lambda: 0.0, phi1: 0.5, phi2: 0.5 };
        let report = objective(&store, Statistic::ShotsOnTarget, &params, None).unwrap();
        let expected = (100 + 16 + 36 + 4) as f64;
        assert!((report.sse - expected).abs() < 1e-9);
        assert_eq!(report.n_matches, 2);
    }

    #[test]
    fn objective_decomposes_over_leagues() {
        let store = MatchStore::build(
            vec![
                mk("L1", "2000-01", 0, "A", "B", (10, 4)),
                mk("L1", "2000-01", 7, "B", "A", (6, 2)),
                mk("L2", "2000-01", 1, "C", "D", (3, 3)),
                mk("L2", "2000-01", 8, "D", "C", (7, 1)),
            ],
            &[Statistic::ShotsOnTarget],
            &no_levels(),
        );
        let params = RatingParams::new(0.3, 0.4, 0.6).unwrap();
        let report = objective(&store, Statistic::ShotsOnTarget, &params, None).unwrap();
        let sum: f64 = report.per_league.values().sum();
        assert!((report.sse - sum).abs() < 1e-9);
        assert_eq!(report.per_league.len(), 2);
    }

    #[test]
    fn objective_respects_season_cutoff() {
        let store = MatchStore::build(
            vec![
                mk("L", "2000-01", 0, "A", "B", (10, 4)),
                mk("L", "2001-02", 0, "A", "B", (6, 2)),
            ],
            &[Statistic::ShotsOnTarget],
            &no_levels(),
        );
        let params = RatingParams { lambda: 0.0, phi1: 0.5, phi2: 0.5 };
        let all = objective(&store, Statistic::ShotsOnTarget, &params, None).unwrap();
        let early = objective(&store, Statistic::ShotsOnTarget, &params, Some("2001-02")).unwrap();
        assert_eq!(early.n_matches, 1);
        assert!(early.sse < all.sse);
    }

    #[test]
    fn optimize_never_loses_to_grid_or_seed() {
        let mut records = Vec::new();
        // Two seasons of a small league with stable team differences, so a
        // positive learning rate clearly beats the frozen baseline.
        let teams = ["A", "B", "C", "D"];
        let strength = [4u32, 7, 10, 13];
        for (si, season) in ["2000-01", "2001-02"].iter().enumerate() {
            let mut day = 0;
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        records.push(mk(
                            "L",
                            season,
                            day + si as u32,
                            teams[i],
                            teams[j],
                            (strength[i] + 2, strength[j]),
                        ));
                        day += 3;
                    }
                }
            }
        }
        let store = MatchStore::build(records, &[Statistic::ShotsOnTarget], &no_levels());
        let result = optimize(&store, Statistic::ShotsOnTarget, None, None).unwrap();
        assert!(result.sse <= result.grid_sse + 1e-12);
        let seed_report = objective(
            &store,
            Statistic::ShotsOnTarget,
            &DEFAULT_SEED_PARAMS,
            None,
        )
        .unwrap();
        assert!(result.sse <= seed_report.sse + 1e-12);
        result.params.validate().unwrap();
        assert!(result.params.lambda > 0.0);
    }

    #[test]
    fn optimize_without_data_is_an_error() {
        let store = MatchStore::build(vec![], &[Statistic::Goals], &no_levels());
        assert!(matches!(
            optimize(&store, Statistic::Goals, None, None),
            Err(Error::NotEnoughData(_))
        ));
    }

    #[test]
    fn schedule_covers_every_season_after_the_first() {
        let records = vec![
            mk("L", "2000-01", 0, "A", "B", (10, 4)),
            mk("L", "2000-01", 7, "B", "A", (6, 2)),
            mk("L", "2001-02", 0, "A", "B", (9, 5)),
            mk("L", "2001-02", 7, "B", "A", (7, 3)),
            mk("L", "2002-03", 0, "A", "B", (11, 3)),
        ];
        let store = MatchStore::build(records, &[Statistic::ShotsOnTarget], &no_levels());
        let schedule = schedule_params(&store, &[Statistic::ShotsOnTarget]).unwrap();
        assert!(schedule.params_for(Statistic::ShotsOnTarget, "2000-01").is_none());
        assert!(schedule.params_for(Statistic::ShotsOnTarget, "2001-02").is_some());
        assert!(schedule.params_for(Statistic::ShotsOnTarget, "2002-03").is_some());
        assert_eq!(schedule.get(Statistic::ShotsOnTarget, "2001-02").unwrap().n_matches, 2);
        assert_eq!(schedule.get(Statistic::ShotsOnTarget, "2002-03").unwrap().n_matches, 4);

        // Deterministic: refitting yields the identical schedule.
        let again = schedule_params(&store, &[Statistic::ShotsOnTarget]).unwrap();
        assert_eq!(schedule, again);
    }

    #[test]
    fn schedule_round_trips_through_csv() {
        let mut schedule = ParamSchedule::default();
        schedule.insert(
            Statistic::Corners,
            "2004-05",
            ScheduleEntry {
                params: RatingParams::new(0.123456789012345, 0.5, 0.25).unwrap(),
                sse: 1234.5678901234,
                n_matches: 380,
            },
        );
        schedule.insert(
            Statistic::Goals,
            "2005-06",
            ScheduleEntry {
                params: RatingParams::new(0.05, 0.9, 0.1).unwrap(),
                sse: 99.5,
                n_matches: 760,
            },
        );
        let mut buf = Vec::new();
        schedule.write_csv(&mut buf).unwrap();
        let loaded = ParamSchedule::read_csv(buf.as_slice()).unwrap();
        assert_eq!(schedule, loaded);
    }

    #[test]
    fn latest_at_or_before_walks_backwards() {
        let mut schedule = ParamSchedule::default();
        for season in ["2001-02", "2003-04"] {
            schedule.insert(
                Statistic::Goals,
                season,
                ScheduleEntry {
                    params: DEFAULT_SEED_PARAMS,
                    sse: 0.0,
                    n_matches: 0,
                },
            );
        }
        assert_eq!(
            schedule.latest_at_or_before(Statistic::Goals, "2004-05").unwrap().0,
            "2003-04"
        );
        assert_eq!(
            schedule.latest_at_or_before(Statistic::Goals, "2002-03").unwrap().0,
            "2001-02"
        );
        assert!(schedule.latest_at_or_before(Statistic::Goals, "2000-01").is_none());
        assert!(schedule.latest_at_or_before(Statistic::Corners, "2004-05").is_none());
    }
}
