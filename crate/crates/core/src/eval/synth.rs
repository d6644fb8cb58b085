//! Synthetic multi-tier league generator with known ground truth.
//!
//! Teams carry true per-statistic scoring and conceding rates. Goals are
//! Poisson draws around the fixture's true means and determine the
//! outcome, exactly as in real football. The remaining statistics are
//! Poisson draws tilted toward that outcome by accept-reject against a
//! known ordinal model on their differences, so statistic differences
//! stay informative about results. Bookmaker odds price the same ordinal
//! model at the fixture's expected differences — pre-match knowledge
//! only — plus a margin and per-bookmaker noise. Leagues exchange their
//! best and worst teams between adjacent tiers each season, so promotion
//! and relegation handling gets exercised end to end. The generator is
//! fully determined by its seed, which makes it usable for oracle tests:
//! estimates can be compared against the truth it returns.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::data::store::LeagueLevel;
use crate::data::{BookmakerOdds, MatchRecord, MatchStore};
use crate::error::{Error, Result};
use crate::ordinal::{Family, OrdinalModel, PredictorSpec};
use crate::ratings::TeamRatings;
use crate::types::{Outcome, Statistic};

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub n_leagues: usize,
    /// Teams per league; must be even and at least 4.
    pub teams_per_league: usize,
    pub n_seasons: usize,
    /// Calendar year the first season starts in.
    pub first_year: i32,
    /// Teams exchanged between adjacent tiers at each season break.
    pub exchange: usize,
    /// Half-range of the team strength multiplier: strengths span
    /// `[1 - spread, 1 + spread]`. Bigger values make teams more
    /// distinguishable from noise.
    pub strength_spread: f64,
    pub seed: u64,
    /// Bookmaker margin applied to true probabilities.
    pub odds_margin: f64,
    /// Half-width of the uniform per-bookmaker, per-outcome margin noise.
    pub odds_jitter: f64,
    pub n_bookmakers: usize,
}

impl Default for SynthParams {
    fn default() -> SynthParams {
        SynthParams {
            n_leagues: 3,
            teams_per_league: 10,
            n_seasons: 6,
            first_year: 2000,
            exchange: 2,
            strength_spread: 0.35,
            seed: 7,
            odds_margin: 0.045,
            odds_jitter: 0.05,
            n_bookmakers: 3,
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        if self.n_leagues == 0 || self.n_seasons == 0 {
            return Err(Error::invalid("need at least one league and season"));
        }
        if self.teams_per_league < 4 || self.teams_per_league % 2 != 0 {
            return Err(Error::invalid(
                "teams per league must be even and at least 4",
            ));
        }
        if self.n_leagues > 1 && 2 * self.exchange > self.teams_per_league {
            return Err(Error::invalid(
                "cannot exchange more than half a league per season",
            ));
        }
        if self.odds_margin <= -1.0 || self.odds_jitter < 0.0 || self.n_bookmakers == 0 {
            return Err(Error::invalid("bad odds parameters"));
        }
        if !(0.0..1.0).contains(&self.strength_spread) {
            return Err(Error::invalid("strength spread must be in [0, 1)"));
        }
        Ok(())
    }
}

/// The ground truth behind a generated store.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SynthTruth {
    /// True rates per team, indexed by `Statistic::index()`.
    pub rates: BTreeMap<String, [TeamRatings; 4]>,
    /// Ordinal model on shots-on/off-target and corner differences that
    /// ties those statistics to outcomes and prices the bookmaker odds.
    pub model: OrdinalModel,
}

/// Mean statistic values implied by the true rates for a fixture.
pub fn true_means(home: &[TeamRatings; 4], away: &[TeamRatings; 4], stat: Statistic) -> (f64, f64) {
    let (h, a) = (&home[stat.index()], &away[stat.index()]);
    (
        (h.home_attack + a.away_defence) / 2.0,
        (a.away_attack + h.home_defence) / 2.0,
    )
}

/// Base scales per statistic: (home side, away side) means for an
/// average fixture.
fn stat_scales(stat: Statistic) -> (f64, f64) {
    match stat {
        Statistic::Goals => (1.5, 1.15),
        Statistic::ShotsOnTarget => (4.6, 3.9),
        Statistic::ShotsOffTarget => (5.6, 4.9),
        Statistic::Corners => (5.9, 5.1),
    }
}

fn season_label(start_year: i32) -> String {
    format!("{}-{:02}", start_year, (start_year + 1).rem_euclid(100))
}

/// Fixture rounds of a double round robin for `n` teams (even), as index
/// pairs. The second half mirrors the first with venues swapped.
fn double_round_robin(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut rounds = Vec::with_capacity(2 * (n - 1));
    let mut others: Vec<usize> = (1..n).collect();
    for r in 0..n - 1 {
        let mut slots = Vec::with_capacity(n);
        slots.push(0);
        slots.extend(others.iter().copied());
        let mut pairs = Vec::with_capacity(n / 2);
        for i in 0..n / 2 {
            let (a, b) = (slots[i], slots[n - 1 - i]);
            // Alternate who hosts so home matches spread evenly.
            pairs.push(if r % 2 == 0 { (a, b) } else { (b, a) });
        }
        rounds.push(pairs);
        others.rotate_left(1);
    }
    for r in 0..n - 1 {
        let mirrored = rounds[r].iter().map(|&(h, a)| (a, h)).collect();
        rounds.push(mirrored);
    }
    rounds
}

fn sample_count(rng: &mut ChaCha8Rng, mean: f64) -> u32 {
    let poisson = Poisson::new(mean).expect("positive mean");
    poisson.sample(rng) as u32
}

/// Generate a complete store plus its ground truth.
pub fn synth_store(params: &SynthParams) -> Result<(MatchStore, SynthTruth)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let total_teams = params.n_leagues * params.teams_per_league;

    // True rates: team 0 strongest, strength falling linearly, with
    // multiplicative jitter so no two teams are exact copies.
    let team_name = |i: usize| format!("Team {:02}", i + 1);
    let mut rates: BTreeMap<String, [TeamRatings; 4]> = BTreeMap::new();
    for i in 0..total_teams {
        let u = if total_teams == 1 {
            0.5
        } else {
            1.0 - i as f64 / (total_teams - 1) as f64
        };
        let spread = params.strength_spread;
        let strength = 1.0 - spread + 2.0 * spread * u;
        let weakness = 1.0 - spread + 2.0 * spread * (1.0 - u);
        let mut team = [TeamRatings::default(); 4];
        for stat in Statistic::ALL {
            let (home_scale, away_scale) = stat_scales(stat);
            let mut jitter = || 1.0 + 0.08 * (2.0 * rng.random::<f64>() - 1.0);
            team[stat.index()] = TeamRatings {
                home_attack: home_scale * strength * jitter(),
                away_attack: away_scale * strength * jitter(),
                // Defence ratings are conceded amounts, so they scale with
                // the opponent's side of the pitch and with weakness.
                home_defence: away_scale * weakness * jitter(),
                away_defence: home_scale * weakness * jitter(),
            };
        }
        rates.insert(team_name(i), team);
    }

    let spec = PredictorSpec::new(
        "truth",
        Family::Observed,
        &[
            Statistic::ShotsOnTarget,
            Statistic::ShotsOffTarget,
            Statistic::Corners,
        ],
        false,
    )?;
    let model = OrdinalModel::new(spec, -0.25, 0.85, vec![0.22, 0.08, 0.05])?;

    // Initial membership by strength: tier 1 gets the strongest teams.
    let mut membership: Vec<Vec<usize>> = (0..params.n_leagues)
        .map(|l| (l * params.teams_per_league..(l + 1) * params.teams_per_league).collect())
        .collect();

    let mut records: Vec<MatchRecord> = Vec::new();
    for s in 0..params.n_seasons {
        let year = params.first_year + s as i32;
        let season = season_label(year);
        let start = NaiveDate::from_ymd_opt(year, 8, 20)
            .ok_or_else(|| Error::invalid(format!("bad start year {year}")))?;
        // points, goal difference, goals for; per league, per team.
        let mut tables: Vec<BTreeMap<usize, (i64, i64, i64)>> = Vec::new();
        for teams in &membership {
            let mut table: BTreeMap<usize, (i64, i64, i64)> =
                teams.iter().map(|&t| (t, (0, 0, 0))).collect();
            let league_idx = tables.len();
            let league_id = format!("L{}", league_idx + 1);
            for (round, pairs) in double_round_robin(teams.len()).iter().enumerate() {
                let date = start + Days::new(7 * round as u64);
                for &(hi, ai) in pairs {
                    let home = team_name(teams[hi]);
                    let away = team_name(teams[ai]);
                    let home_rates = rates[&home];
                    let away_rates = rates[&away];

                    // Goals come straight from the true rates and decide
                    // the result, as on a real pitch.
                    let (mu_gh, mu_ga) = true_means(&home_rates, &away_rates, Statistic::Goals);
                    let goals = (sample_count(&mut rng, mu_gh), sample_count(&mut rng, mu_ga));
                    let outcome = Outcome::from_goals(goals.0, goals.1);

                    // The other statistics are drawn from their true rates
                    // and accepted with the ordinal model's probability of
                    // this match's outcome, which tilts their differences
                    // toward it without losing the team-specific levels.
                    let mut stat_values = [(0u32, 0u32); 4];
                    stat_values[Statistic::Goals.index()] = goals;
                    for _ in 0..200 {
                        for stat in [
                            Statistic::ShotsOnTarget,
                            Statistic::ShotsOffTarget,
                            Statistic::Corners,
                        ] {
                            let (mu_h, mu_a) = true_means(&home_rates, &away_rates, stat);
                            stat_values[stat.index()] =
                                (sample_count(&mut rng, mu_h), sample_count(&mut rng, mu_a));
                        }
                        let diff = |stat: Statistic| {
                            let (h, a) = stat_values[stat.index()];
                            f64::from(h) - f64::from(a)
                        };
                        let candidate = model.predict(&[
                            diff(Statistic::ShotsOnTarget),
                            diff(Statistic::ShotsOffTarget),
                            diff(Statistic::Corners),
                        ])?;
                        let accept = match outcome {
                            Outcome::HomeWin => candidate.home,
                            Outcome::Draw => candidate.draw,
                            Outcome::AwayWin => candidate.away,
                        };
                        if rng.random::<f64>() < accept {
                            break;
                        }
                    }

                    // Bookmakers price the ordinal model at the expected
                    // differences; they know the teams, not the match.
                    let expected_diff = |stat: Statistic| {
                        let (mu_h, mu_a) = true_means(&home_rates, &away_rates, stat);
                        mu_h - mu_a
                    };
                    let pre_match = model.predict(&[
                        expected_diff(Statistic::ShotsOnTarget),
                        expected_diff(Statistic::ShotsOffTarget),
                        expected_diff(Statistic::Corners),
                    ])?;
                    let probs = [pre_match.home, pre_match.draw, pre_match.away];
                    let odds = (0..params.n_bookmakers)
                        .map(|b| {
                            let mut price = |p: f64| {
                                let eps = params.odds_jitter
                                    * (2.0 * rng.random::<f64>() - 1.0);
                                (1.0 / (p * (1.0 + params.odds_margin) * (1.0 + eps)))
                                    .max(1.01)
                            };
                            BookmakerOdds {
                                bookmaker: format!("BK{}", b + 1),
                                home: price(probs[0]),
                                draw: price(probs[1]),
                                away: price(probs[2]),
                            }
                        })
                        .collect();

                    let points = match outcome {
                        Outcome::HomeWin => (3, 0),
                        Outcome::Draw => (1, 1),
                        Outcome::AwayWin => (0, 3),
                    };
                    let gd = i64::from(goals.0) - i64::from(goals.1);
                    let home_row = table.get_mut(&teams[hi]).expect("home in table");
                    home_row.0 += points.0;
                    home_row.1 += gd;
                    home_row.2 += i64::from(goals.0);
                    let away_row = table.get_mut(&teams[ai]).expect("away in table");
                    away_row.0 += points.1;
                    away_row.1 -= gd;
                    away_row.2 += i64::from(goals.1);

                    records.push(MatchRecord {
                        league_id: league_id.clone(),
                        season: season.clone(),
                        date,
                        home_team: home,
                        away_team: away,
                        home_goals: goals.0,
                        away_goals: goals.1,
                        outcome,
                        home_shots_on_target: Some(stat_values[1].0),
                        away_shots_on_target: Some(stat_values[1].1),
                        home_shots_off_target: Some(stat_values[2].0),
                        away_shots_off_target: Some(stat_values[2].1),
                        home_corners: Some(stat_values[3].0),
                        away_corners: Some(stat_values[3].1),
                        odds,
                    });
                }
            }
            tables.push(table);
        }

        // Season break: swap the bottom of each tier with the top of the
        // tier below, all moves decided from this season's standings.
        if s + 1 < params.n_seasons && params.n_leagues > 1 {
            let standings: Vec<Vec<usize>> = tables
                .iter()
                .map(|table| {
                    let mut order: Vec<usize> = table.keys().copied().collect();
                    order.sort_by_key(|t| {
                        let (pts, gd, gf) = table[t];
                        (std::cmp::Reverse((pts, gd, gf)), *t)
                    });
                    order
                })
                .collect();
            let mut next = membership.clone();
            for upper in 0..params.n_leagues - 1 {
                let lower = upper + 1;
                let down: Vec<usize> = standings[upper]
                    .iter()
                    .rev()
                    .take(params.exchange)
                    .copied()
                    .collect();
                let up: Vec<usize> = standings[lower]
                    .iter()
                    .take(params.exchange)
                    .copied()
                    .collect();
                next[upper].retain(|t| !down.contains(t));
                next[upper].extend(&up);
                next[lower].retain(|t| !up.contains(t));
                next[lower].extend(&down);
            }
            for teams in &mut next {
                teams.sort_unstable();
            }
            membership = next;
        }
    }

    let levels: BTreeMap<String, LeagueLevel> = (0..params.n_leagues)
        .map(|l| {
            (
                format!("L{}", l + 1),
                LeagueLevel {
                    country: "Synthland".to_string(),
                    tier: l as u32 + 1,
                },
            )
        })
        .collect();
    let store = MatchStore::build(records, &Statistic::ALL, &levels);
    Ok((store, SynthTruth { rates, model }))
}
