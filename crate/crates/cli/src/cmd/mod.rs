//! Subcommand implementations and the helpers they share.

pub mod aic;
pub mod backtest;
pub mod evaluate;
pub mod ingest;
pub mod optimize;
pub mod synth;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use gapcast::data::MatchStore;
use gapcast::params::ParamSchedule;
use gapcast::types::Statistic;
use gapcast::{Error, Result};

/// Default seed feeding every stochastic step (bootstrap resampling);
/// override with --seed for alternative realizations.
pub const DEFAULT_SEED: u64 = 20_070;

/// Bootstrap replicates giving percent-profit intervals stable to about
/// two decimal places.
pub const DEFAULT_REPLICATES: usize = 10_000;

pub fn store_dir(out: &Path) -> PathBuf {
    out.join("store")
}

pub fn schedule_path(out: &Path) -> PathBuf {
    out.join("params").join("schedule.csv")
}

pub fn reports_dir(out: &Path) -> PathBuf {
    out.join("reports")
}

pub fn load_store(out: &Path) -> Result<MatchStore> {
    let dir = store_dir(out);
    if !dir.join("store.jsonl").is_file() {
        return Err(Error::invalid(format!(
            "no match store under {}: run `gapcast ingest` (or `gapcast synth`) with --out {} first",
            dir.display(),
            out.display()
        )));
    }
    let store = MatchStore::load(&dir)?;
    log::info!("loaded {} matches from {}", store.len(), dir.display());
    Ok(store)
}

pub fn load_schedule(out: &Path) -> Result<ParamSchedule> {
    let path = schedule_path(out);
    if !path.is_file() {
        return Err(Error::invalid(format!(
            "no parameter schedule at {}: run `gapcast optimize` first",
            path.display()
        )));
    }
    ParamSchedule::read_csv(File::open(&path)?)
}

/// Create the parent directory of `path` and open it for buffered writing.
pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Parse a comma-separated statistic list; `all` (the default) expands to
/// every tracked statistic, in canonical order.
pub fn parse_stats(raw: &str) -> Result<Vec<Statistic>> {
    if raw.trim().eq_ignore_ascii_case("all") {
        return Ok(Statistic::ALL.to_vec());
    }
    let mut stats = Vec::new();
    for part in raw.split(',') {
        let stat = Statistic::parse(part)?;
        if !stats.contains(&stat) {
            stats.push(stat);
        }
    }
    if stats.is_empty() {
        return Err(Error::invalid("empty statistic list"));
    }
    Ok(stats)
}
