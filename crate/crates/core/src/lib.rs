//! Football match forecasting from per-team match statistics.
//!
//! The pipeline turns raw league result CSVs into a canonical match store,
//! fits per-statistic rating parameters season by season, feeds rating-based
//! statistic predictions into ordinal outcome models, and evaluates the
//! resulting forecasts through walk-forward betting backtests and error
//! reports.

pub mod betting;
pub mod data;
pub mod error;
pub mod eval;
pub mod ordinal;
pub mod params;
pub mod ratings;
pub mod replay;
pub mod types;

pub use error::{Error, Result};
