//! `gapcast ingest` — raw league CSVs to the canonical match store.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use gapcast::data::{parse_league_csv, IngestConfig, MatchRecord, MatchStore};
use gapcast::types::Statistic;
use gapcast::{Error, Result};

use super::{create_file, reports_dir, store_dir};

/// Statistics a match must report to be forecastable; goals are always
/// present, so eligibility hinges on the shot and corner counts.
pub const REQUIRED_STATS: [Statistic; 3] = [
    Statistic::ShotsOnTarget,
    Statistic::ShotsOffTarget,
    Statistic::Corners,
];

const LAYOUT_HELP: &str = "expected layout: one CSV per league and season, either flat \
(<data-dir>/E0.csv, seasons read from each row's date) or per-season \
(<data-dir>/2004-05/E0.csv or <data-dir>/0405/E0.csv); file stems must be \
division codes from the ingest configuration, e.g. E0, D1, SP1";

#[derive(Args)]
pub struct IngestArgs {
    /// Directory holding the raw league CSV files.
    #[arg(long)]
    pub data_dir: PathBuf,
    /// Pipeline output directory; the store lands in <out>/store.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated division codes to ingest, or `all`.
    #[arg(long, default_value = "all")]
    pub leagues: String,
    /// Ingest configuration TOML overriding the built-in defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

struct LeagueFile {
    path: PathBuf,
    league_id: String,
}

/// League CSVs directly under `dir` or exactly one directory level down,
/// sorted by path for deterministic ingestion order.
fn find_league_files(dir: &Path, config: &IngestConfig) -> Result<Vec<LeagueFile>> {
    if !dir.is_dir() {
        return Err(Error::invalid(format!(
            "data directory {} does not exist; {LAYOUT_HELP}",
            dir.display()
        )));
    }
    let mut files = Vec::new();
    let visit = |path: PathBuf, files: &mut Vec<LeagueFile>| {
        if path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase)
            != Some("csv".into())
        {
            return;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            let league_id = stem.to_ascii_uppercase();
            if config.leagues.contains_key(&league_id) {
                files.push(LeagueFile { path, league_id });
            } else {
                log::warn!("skipping {}: unknown division code {league_id:?}", path.display());
            }
        }
    };
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            for inner in std::fs::read_dir(&path)? {
                visit(inner?.path(), &mut files);
            }
        } else {
            visit(path, &mut files);
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}

fn wanted_leagues(raw: &str, config: &IngestConfig) -> Result<Option<Vec<String>>> {
    if raw.trim().eq_ignore_ascii_case("all") {
        return Ok(None);
    }
    let mut wanted = Vec::new();
    for part in raw.split(',') {
        let id = part.trim().to_ascii_uppercase();
        if !config.leagues.contains_key(&id) {
            return Err(Error::invalid(format!(
                "unknown division code {id:?}; known: {}",
                config.leagues.keys().cloned().collect::<Vec<_>>().join(", ")
            )));
        }
        wanted.push(id);
    }
    Ok(Some(wanted))
}

pub fn run(args: &IngestArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => IngestConfig::load(path)?,
        None => IngestConfig::default_config(),
    };
    let wanted = wanted_leagues(&args.leagues, &config)?;
    let files = find_league_files(&args.data_dir, &config)?;
    let files: Vec<&LeagueFile> = files
        .iter()
        .filter(|f| wanted.as_ref().is_none_or(|w| w.contains(&f.league_id)))
        .collect();
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "no recognized league CSVs under {}; {LAYOUT_HELP}",
            args.data_dir.display()
        )));
    }

    let mut records: Vec<MatchRecord> = Vec::new();
    let mut ok_leagues: BTreeMap<String, usize> = BTreeMap::new();
    let mut failures = 0usize;
    for file in &files {
        match parse_league_csv(&file.path, &file.league_id, &config, None) {
            Ok(parsed) => {
                log::info!("{}: {} matches", file.path.display(), parsed.len());
                *ok_leagues.entry(file.league_id.clone()).or_insert(0) += parsed.len();
                records.extend(parsed);
            }
            Err(err) => {
                log::warn!("{}: {err}", file.path.display());
                failures += 1;
            }
        }
    }
    if ok_leagues.is_empty() {
        return Err(Error::invalid(format!(
            "all {failures} league files failed to parse; {LAYOUT_HELP}"
        )));
    }
    if failures > 0 {
        log::warn!("{failures} files failed to parse and were skipped");
    }

    let store = MatchStore::build(records, &REQUIRED_STATS, &config.levels());
    let dir = store_dir(&args.out);
    store.save(&dir)?;
    log::info!("wrote {} matches to {}", store.len(), dir.display());

    let summary = league_summary(&store, &config);
    print_summary(&summary);
    let csv_path = reports_dir(&args.out).join("ingest_summary.csv");
    write_summary_csv(&summary, &csv_path)?;
    log::info!("wrote {}", csv_path.display());
    Ok(())
}

pub struct SummaryRow {
    pub league_id: String,
    pub name: String,
    pub total: usize,
    pub with_stats: usize,
    pub eligible: usize,
}

pub fn league_summary(store: &MatchStore, config: &IngestConfig) -> Vec<SummaryRow> {
    let mut by_league: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for (record, flag) in store.iter_with_flags() {
        let row = by_league.entry(&record.league_id).or_default();
        row.0 += 1;
        if record.has_stats(&REQUIRED_STATS) {
            row.1 += 1;
        }
        if flag.eligible {
            row.2 += 1;
        }
    }
    by_league
        .into_iter()
        .map(|(id, (total, with_stats, eligible))| SummaryRow {
            league_id: id.to_string(),
            name: config
                .leagues
                .get(id)
                .map(|m| m.name.clone())
                .unwrap_or_default(),
            total,
            with_stats,
            eligible,
        })
        .collect()
}

fn print_summary(rows: &[SummaryRow]) {
    println!(
        "{:<6} {:<34} {:>8} {:>12} {:>10}",
        "league", "name", "matches", "with stats", "eligible"
    );
    let mut totals = (0usize, 0usize, 0usize);
    for row in rows {
        println!(
            "{:<6} {:<34} {:>8} {:>12} {:>10}",
            row.league_id, row.name, row.total, row.with_stats, row.eligible
        );
        totals.0 += row.total;
        totals.1 += row.with_stats;
        totals.2 += row.eligible;
    }
    println!(
        "{:<6} {:<34} {:>8} {:>12} {:>10}",
        "total", "", totals.0, totals.1, totals.2
    );
}

fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create_file(path)?);
    w.write_record(["league", "name", "matches", "with_stats", "eligible"])?;
    for row in rows {
        w.write_record([
            row.league_id.as_str(),
            &row.name,
            &row.total.to_string(),
            &row.with_stats.to_string(),
            &row.eligible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
