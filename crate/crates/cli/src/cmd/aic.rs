//! `gapcast aic` — rank predictor combinations by AIC.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gapcast::ordinal::{aic_table, feature_rows, write_aic_csv, AicRow, Family, FitMode};
use gapcast::replay::walk_forward_predictions;
use gapcast::types::Statistic;
use gapcast::Result;

use super::{create_file, load_schedule, load_store, reports_dir};

#[derive(Clone, Copy, PartialEq, ValueEnum)]
pub enum FamilyArg {
    /// Combinations of observed statistics (hindsight reference ranking).
    Observed,
    /// Combinations of rating-predicted statistics (usable pre-match).
    Predicted,
    /// Both tables.
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    /// Minimize the squared probability error of the outcome forecasts.
    Ls,
    /// Maximize the ordinal log-likelihood.
    Ml,
}

impl ModeArg {
    pub fn fit_mode(self) -> FitMode {
        match self {
            ModeArg::Ls => FitMode::LeastSquares,
            ModeArg::Ml => FitMode::MaximumLikelihood,
        }
    }
}

#[derive(Args)]
pub struct AicArgs {
    /// Pipeline output directory holding the store and schedule.
    #[arg(long)]
    pub out: PathBuf,
    /// Which combination family to rank.
    #[arg(long, value_enum, default_value_t = FamilyArg::Both)]
    pub family: FamilyArg,
    /// Model-fitting objective.
    #[arg(long, value_enum, default_value_t = ModeArg::Ls)]
    pub mode: ModeArg,
}

pub fn run(args: &AicArgs) -> Result<()> {
    let store = load_store(&args.out)?;
    // Observed-only rankings need no rating predictions; anything touching
    // the predicted family replays the ratings from the schedule.
    let predictions = if args.family == FamilyArg::Observed {
        vec![Default::default(); store.len()]
    } else {
        let schedule = load_schedule(&args.out)?;
        walk_forward_predictions(&store, &schedule, &Statistic::ALL)?
    };
    let rows = feature_rows(&store.records, &store.flags, &predictions);

    let families: &[(Family, &str)] = match args.family {
        FamilyArg::Observed => &[(Family::Observed, "aic_observed.csv")],
        FamilyArg::Predicted => &[(Family::Predicted, "aic_predicted.csv")],
        FamilyArg::Both => &[
            (Family::Observed, "aic_observed.csv"),
            (Family::Predicted, "aic_predicted.csv"),
        ],
    };
    for &(family, file_name) in families {
        let table = aic_table(&rows, family, args.mode.fit_mode())?;
        let path = reports_dir(&args.out).join(file_name);
        write_aic_csv(&table, create_file(&path)?)?;
        log::info!("wrote {}", path.display());
        print_table(&table);
    }
    Ok(())
}

fn print_table(table: &[AicRow]) {
    println!(
        "{:<6} {:<24} {:>16} {:>13} {:>8}",
        "combo", "statistics", "aic (no odds)", "aic (odds)", "rows"
    );
    let fmt = |v: Option<f64>| v.map(|v| format!("{v:.1}")).unwrap_or("-".into());
    for row in table {
        println!(
            "{:<6} {:<24} {:>16} {:>13} {:>8}",
            row.label,
            row.stats,
            fmt(row.aic_without_odds),
            fmt(row.aic_with_odds),
            row.n_rows
        );
        if let Some(err) = &row.error {
            println!("       {err}");
        }
    }
}
