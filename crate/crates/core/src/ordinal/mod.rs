//! Ordinal match-outcome models.
//!
//! Outcomes are ordered home win > draw > away win. A model has two cut
//! points and one slope per predictor, shared across the cumulative
//! levels: the probability of a home win is `sigmoid(cut_home + eta)` and
//! of a home win or draw `sigmoid(cut_home_draw + eta)`, with `eta` the
//! linear predictor. Predictors are home-minus-away differences of match
//! statistics, either observed after the fact or predicted from ratings
//! before kick-off, optionally followed by the implied probability of a
//! home win from best market odds.

mod fit;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{EligibilityFlag, MatchRecord, OddsSummary};
use crate::error::{Error, Result};
use crate::ratings::StatPrediction;
use crate::types::{Outcome, Statistic};

pub use fit::{logit, sigmoid};

/// Whether statistic predictors are post-match observations or pre-match
/// rating predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Observed,
    Predicted,
}

impl Family {
    pub fn prefix(self) -> &'static str {
        match self {
            Family::Observed => "A",
            Family::Predicted => "B",
        }
    }
}

/// Fitting criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Minimize squared distance between forecasts and one-hot outcomes.
    LeastSquares,
    /// Maximize the multinomial log-likelihood.
    MaximumLikelihood,
}

impl FitMode {
    pub fn parse(s: &str) -> Result<FitMode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ls" | "least_squares" | "least-squares" => Ok(FitMode::LeastSquares),
            "ml" | "maximum_likelihood" | "maximum-likelihood" => {
                Ok(FitMode::MaximumLikelihood)
            }
            other => Err(Error::invalid(format!("unknown fit mode {other:?}"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FitMode::LeastSquares => "least_squares",
            FitMode::MaximumLikelihood => "maximum_likelihood",
        }
    }
}

/// A named predictor combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub label: String,
    pub family: Family,
    /// Statistic differences used as predictors, in canonical order.
    pub stats: Vec<Statistic>,
    pub with_odds: bool,
}

/// Statistic sets of the observed-statistic menu, indexed by label number.
/// Goals are excluded: observed goals determine the outcome.
const OBSERVED_MENU: [&[Statistic]; 8] = [
    &[],
    &[Statistic::ShotsOnTarget, Statistic::ShotsOffTarget, Statistic::Corners],
    &[Statistic::ShotsOnTarget, Statistic::ShotsOffTarget],
    &[Statistic::ShotsOnTarget, Statistic::Corners],
    &[Statistic::ShotsOnTarget],
    &[Statistic::ShotsOffTarget, Statistic::Corners],
    &[Statistic::Corners],
    &[Statistic::ShotsOffTarget],
];

/// Statistic sets of the predicted-statistic menu: the observed menu first
/// (labels 0..=7), then the same sets with predicted goals added (8..=15).
/// Label 16 repeats the empty set and is accepted as an alias of 0.
const PREDICTED_MENU: [&[Statistic]; 17] = [
    &[],
    &[Statistic::ShotsOnTarget, Statistic::ShotsOffTarget, Statistic::Corners],
    &[Statistic::ShotsOnTarget, Statistic::ShotsOffTarget],
    &[Statistic::ShotsOnTarget, Statistic::Corners],
    &[Statistic::ShotsOnTarget],
    &[Statistic::ShotsOffTarget, Statistic::Corners],
    &[Statistic::Corners],
    &[Statistic::ShotsOffTarget],
    &[Statistic::Goals],
    &[
        Statistic::Goals,
        Statistic::ShotsOnTarget,
        Statistic::ShotsOffTarget,
        Statistic::Corners,
    ],
    &[Statistic::Goals, Statistic::ShotsOnTarget, Statistic::ShotsOffTarget],
    &[Statistic::Goals, Statistic::ShotsOnTarget, Statistic::Corners],
    &[Statistic::Goals, Statistic::ShotsOnTarget],
    &[Statistic::Goals, Statistic::ShotsOffTarget, Statistic::Corners],
    &[Statistic::Goals, Statistic::Corners],
    &[Statistic::Goals, Statistic::ShotsOffTarget],
    &[],
];

impl PredictorSpec {
    /// Build a custom combination. Statistics are put into canonical order
    /// and deduplicated; at most five predictors (statistics plus the odds
    /// term) are allowed.
    pub fn new(
        label: impl Into<String>,
        family: Family,
        stats: &[Statistic],
        with_odds: bool,
    ) -> Result<PredictorSpec> {
        let mut stats = stats.to_vec();
        stats.sort();
        stats.dedup();
        if family == Family::Observed && stats.contains(&Statistic::Goals) {
            return Err(Error::invalid(
                "observed goals determine the outcome and cannot be a predictor",
            ));
        }
        let spec = PredictorSpec {
            label: label.into(),
            family,
            stats,
            with_odds,
        };
        if spec.feature_count() > 5 {
            return Err(Error::invalid(format!(
                "{}: more than 5 predictors",
                spec.label
            )));
        }
        Ok(spec)
    }

    /// Look up a menu combination like `A3` or `B12`. The numeric part
    /// indexes the published menus; `with_odds` appends the implied
    /// home-win probability.
    pub fn from_label(label: &str, with_odds: bool) -> Result<PredictorSpec> {
        let label = label.trim();
        let (family, menu): (Family, &[&[Statistic]]) = match label.get(0..1) {
            Some("A") | Some("a") => (Family::Observed, &OBSERVED_MENU),
            Some("B") | Some("b") => (Family::Predicted, &PREDICTED_MENU),
            _ => {
                return Err(Error::invalid(format!(
                    "unknown combination {label:?}: expected A<n> or B<n>"
                )))
            }
        };
        let index: usize = label[1..]
            .parse()
            .map_err(|_| Error::invalid(format!("unknown combination {label:?}")))?;
        let stats = menu
            .get(index)
            .ok_or_else(|| Error::invalid(format!("unknown combination {label:?}")))?;
        PredictorSpec::new(
            format!("{}{index}", family.prefix()),
            family,
            stats,
            with_odds,
        )
    }

    /// Every distinct combination of a family, in menu order (the alias
    /// B16 is omitted).
    pub fn menu(family: Family, with_odds: bool) -> Vec<PredictorSpec> {
        let count = match family {
            Family::Observed => OBSERVED_MENU.len(),
            Family::Predicted => PREDICTED_MENU.len() - 1,
        };
        (0..count)
            .map(|i| {
                PredictorSpec::from_label(&format!("{}{i}", family.prefix()), with_odds)
                    .expect("menu labels are valid")
            })
            .collect()
    }

    pub fn feature_count(&self) -> usize {
        self.stats.len() + usize::from(self.with_odds)
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .stats
            .iter()
            .map(|s| format!("{}_diff", s.label()))
            .collect();
        if self.with_odds {
            names.push("implied_home".to_string());
        }
        names
    }

    /// Human-readable statistic set, e.g. `off+cor`.
    pub fn stats_label(&self) -> String {
        if self.stats.is_empty() {
            "none".to_string()
        } else {
            self.stats
                .iter()
                .map(|s| s.short_label())
                .collect::<Vec<_>>()
                .join("+")
        }
    }
}

/// Outcome probability forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub home: f64,
    pub draw: f64,
    pub away: f64,
}

impl Forecast {
    pub fn is_valid(&self) -> bool {
        let parts = [self.home, self.draw, self.away];
        parts.iter().all(|p| p.is_finite() && *p >= 0.0 && *p <= 1.0)
            && (parts.iter().sum::<f64>() - 1.0).abs() < 1e-9
    }

    pub fn probability_of(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::HomeWin => self.home,
            Outcome::Draw => self.draw,
            Outcome::AwayWin => self.away,
        }
    }
}

/// A fitted ordinal model: two cut points and one slope per predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalModel {
    pub spec: PredictorSpec,
    pub cut_home: f64,
    pub cut_home_draw: f64,
    pub slopes: Vec<f64>,
}

impl OrdinalModel {
    pub fn new(
        spec: PredictorSpec,
        cut_home: f64,
        cut_home_draw: f64,
        slopes: Vec<f64>,
    ) -> Result<OrdinalModel> {
        if cut_home > cut_home_draw {
            return Err(Error::invalid(
                "cut points out of order: home boundary above home-or-draw boundary",
            ));
        }
        if slopes.len() != spec.feature_count() {
            return Err(Error::invalid(format!(
                "{} slopes for {} predictors",
                slopes.len(),
                spec.feature_count()
            )));
        }
        Ok(OrdinalModel {
            spec,
            cut_home,
            cut_home_draw,
            slopes,
        })
    }

    fn theta(&self) -> Vec<f64> {
        let mut theta = vec![self.cut_home, self.cut_home_draw];
        theta.extend_from_slice(&self.slopes);
        theta
    }

    pub fn predict(&self, features: &[f64]) -> Result<Forecast> {
        if features.len() != self.slopes.len() {
            return Err(Error::invalid(format!(
                "{} features for {} slopes",
                features.len(),
                self.slopes.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        let p = fit::probabilities(&self.theta(), features);
        Ok(Forecast {
            home: p[0],
            draw: p[1],
            away: p[2],
        })
    }

    /// Squared distance between forecasts and one-hot outcomes.
    pub fn squared_error(&self, rows: &[(Vec<f64>, Outcome)]) -> f64 {
        fit::squared_error(&self.theta(), rows)
    }

    pub fn log_likelihood(&self, rows: &[(Vec<f64>, Outcome)]) -> f64 {
        fit::log_likelihood(&self.theta(), rows)
    }

    /// Akaike information criterion with the likelihood evaluated at this
    /// model's parameters; the parameter count is the slope count plus the
    /// two cut points.
    pub fn aic(&self, rows: &[(Vec<f64>, Outcome)]) -> f64 {
        let k = self.slopes.len() + 2;
        2.0 * k as f64 - 2.0 * self.log_likelihood(rows)
    }
}

/// Feature vector for one match under a spec: statistic differences in
/// canonical order, then the implied home probability. `None` when any
/// required input is missing.
pub fn build_features(
    record: &MatchRecord,
    predictions: &[Option<StatPrediction>; 4],
    odds: Option<&OddsSummary>,
    spec: &PredictorSpec,
) -> Option<Vec<f64>> {
    let mut features = Vec::with_capacity(spec.feature_count());
    for stat in &spec.stats {
        let diff = match spec.family {
            Family::Observed => record.home_stat(*stat)? - record.away_stat(*stat)?,
            Family::Predicted => {
                let p = predictions[stat.index()].as_ref()?;
                p.home - p.away
            }
        };
        features.push(diff);
    }
    if spec.with_odds {
        features.push(odds?.implied_home);
    }
    Some(features)
}

/// Fit a model for a spec, optionally warm-starting from a previous
/// model's parameters (same spec shape).
pub fn fit_with_start(
    rows: &[(Vec<f64>, Outcome)],
    spec: &PredictorSpec,
    mode: FitMode,
    start: Option<&OrdinalModel>,
) -> Result<OrdinalModel> {
    let start_theta = start.map(|m| m.theta());
    let k = spec.feature_count();
    let fitted = match mode {
        FitMode::LeastSquares => fit::least_squares_fit(rows, k, start_theta.as_deref())?,
        FitMode::MaximumLikelihood => {
            fit::maximum_likelihood_fit(rows, k, start_theta.as_deref())?
        }
    };
    log::debug!(
        "{} fit on {} rows: objective {:.6} after {} iterations",
        spec.label,
        rows.len(),
        fitted.objective,
        fitted.iterations
    );
    OrdinalModel::new(
        spec.clone(),
        fitted.theta[0],
        fitted.theta[1],
        fitted.theta[2..].to_vec(),
    )
}

pub fn fit(
    rows: &[(Vec<f64>, Outcome)],
    spec: &PredictorSpec,
    mode: FitMode,
) -> Result<OrdinalModel> {
    fit_with_start(rows, spec, mode, None)
}

/// Pre-extracted model inputs for one match.
#[derive(Debug, Clone)]
pub struct FeatureRow {
    pub record_idx: usize,
    /// Observed home-minus-away differences, indexed by statistic.
    pub observed: [Option<f64>; 4],
    /// Rating-predicted differences, indexed by statistic.
    pub predicted: [Option<f64>; 4],
    pub implied_home: Option<f64>,
    pub outcome: Outcome,
}

impl FeatureRow {
    /// Assemble the feature vector for a spec, `None` if inputs are
    /// missing.
    pub fn features(&self, spec: &PredictorSpec) -> Option<Vec<f64>> {
        let source = match spec.family {
            Family::Observed => &self.observed,
            Family::Predicted => &self.predicted,
        };
        let mut features = Vec::with_capacity(spec.feature_count());
        for stat in &spec.stats {
            features.push(source[stat.index()]?);
        }
        if spec.with_odds {
            features.push(self.implied_home?);
        }
        Some(features)
    }
}

/// Feature rows for every eligible match of a store, with odds summarized
/// when present.
pub fn feature_rows(
    records: &[MatchRecord],
    flags: &[EligibilityFlag],
    predictions: &[[Option<StatPrediction>; 4]],
) -> Vec<FeatureRow> {
    records
        .iter()
        .zip(flags)
        .enumerate()
        .filter(|(_, (_, flag))| flag.eligible)
        .map(|(record_idx, (record, _))| {
            let mut observed = [None; 4];
            for stat in Statistic::ALL {
                observed[stat.index()] = match (record.home_stat(stat), record.away_stat(stat)) {
                    (Some(h), Some(a)) => Some(h - a),
                    _ => None,
                };
            }
            let mut predicted = [None; 4];
            for stat in Statistic::ALL {
                predicted[stat.index()] =
                    predictions[record_idx][stat.index()].map(|p| p.home - p.away);
            }
            let implied_home = crate::data::best_odds(record).ok().map(|s| s.implied_home);
            FeatureRow {
                record_idx,
                observed,
                predicted,
                implied_home,
                outcome: record.outcome,
            }
        })
        .collect()
}

/// One line of the combination comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct AicRow {
    pub label: String,
    pub stats: String,
    /// AIC difference to the no-predictor model, without the odds term.
    pub aic_without_odds: Option<f64>,
    /// Same, with the implied home probability added.
    pub aic_with_odds: Option<f64>,
    pub n_rows: usize,
    pub error: Option<String>,
}

/// Compare every combination of a family on a common dataset.
///
/// Only matches carrying every statistic of the family's largest
/// combination plus odds are used, so all AIC values in the table are
/// computed on identical rows and are comparable. Values are relative to
/// the no-predictor model without odds; the table is sorted by the
/// with-odds column.
pub fn aic_table(rows: &[FeatureRow], family: Family, mode: FitMode) -> Result<Vec<AicRow>> {
    let specs = PredictorSpec::menu(family, false);
    let full: &PredictorSpec = specs
        .iter()
        .max_by_key(|s| s.stats.len())
        .expect("menus are non-empty");
    let complete: Vec<&FeatureRow> = rows
        .iter()
        .filter(|r| r.features(full).is_some() && r.implied_home.is_some())
        .collect();
    if complete.len() < 50 {
        return Err(Error::not_enough(format!(
            "only {} matches have all statistics and odds",
            complete.len()
        )));
    }

    let null_spec = PredictorSpec::new("null", family, &[], false)?;
    let null_rows: Vec<(Vec<f64>, Outcome)> = complete
        .iter()
        .map(|r| (vec![], r.outcome))
        .collect();
    let null_model = fit(&null_rows, &null_spec, mode)?;
    let null_aic = null_model.aic(&null_rows);

    let mut table: Vec<AicRow> = specs
        .par_iter()
        .map(|spec| {
            let mut row = AicRow {
                label: spec.label.clone(),
                stats: spec.stats_label(),
                aic_without_odds: None,
                aic_with_odds: None,
                n_rows: complete.len(),
                error: None,
            };
            for with_odds in [false, true] {
                let spec = PredictorSpec::new(
                    spec.label.clone(),
                    family,
                    &spec.stats,
                    with_odds,
                );
                let result = spec.and_then(|spec| {
                    let data: Vec<(Vec<f64>, Outcome)> = complete
                        .iter()
                        .map(|r| (r.features(&spec).expect("rows are complete"), r.outcome))
                        .collect();
                    let model = fit(&data, &spec, mode)?;
                    Ok(model.aic(&data) - null_aic)
                });
                match (with_odds, result) {
                    (false, Ok(aic)) => row.aic_without_odds = Some(aic),
                    (true, Ok(aic)) => row.aic_with_odds = Some(aic),
                    (_, Err(e)) => row.error = Some(e.to_string()),
                }
            }
            row
        })
        .collect();
    table.sort_by(|a, b| {
        let key = |r: &AicRow| r.aic_with_odds.unwrap_or(f64::INFINITY);
        key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(table)
}

/// Write a combination table as CSV.
pub fn write_aic_csv<W: std::io::Write>(table: &[AicRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["combination", "statistics", "aic_without_odds", "aic_with_odds", "n", "error"])
        .map_err(|e| Error::format(e.to_string()))?;
    for row in table {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.1}")).unwrap_or_default();
        w.write_record([
            row.label.as_str(),
            row.stats.as_str(),
            &fmt(row.aic_without_odds),
            &fmt(row.aic_with_odds),
            &row.n_rows.to_string(),
            row.error.as_deref().unwrap_or(""),
        ])
        .map_err(|e| Error::format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
