//! Ingestion configuration: column-name synonyms, bookmaker prefixes,
//! league metadata and team-name aliases.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::data::store::LeagueLevel;
use crate::error::{Error, Result};

const DEFAULT_CONFIG: &str = include_str!("default_columns.toml");

/// Accepted header names for each canonical CSV field, in preference order.
#[derive(Debug, Clone, Deserialize)]
pub struct ColumnSynonyms {
    pub division: Vec<String>,
    pub date: Vec<String>,
    pub home_team: Vec<String>,
    pub away_team: Vec<String>,
    pub home_goals: Vec<String>,
    pub away_goals: Vec<String>,
    pub result: Vec<String>,
    pub home_shots: Vec<String>,
    pub away_shots: Vec<String>,
    pub home_shots_on_target: Vec<String>,
    pub away_shots_on_target: Vec<String>,
    pub home_corners: Vec<String>,
    pub away_corners: Vec<String>,
    /// Odds column prefixes; `<prefix>H/D/A` triplets become one quote.
    pub bookmakers: Vec<String>,
}

/// Display name, country and tier of one division code.
#[derive(Debug, Clone, Deserialize)]
pub struct LeagueMeta {
    pub name: String,
    pub country: String,
    pub tier: u32,
}

/// Full ingestion configuration, normally loaded from the embedded default
/// and overridable from a TOML file with the same shape.
#[derive(Debug, Clone, Deserialize)]
pub struct IngestConfig {
    pub columns: ColumnSynonyms,
    pub leagues: BTreeMap<String, LeagueMeta>,
    #[serde(default)]
    pub aliases: BTreeMap<String, BTreeMap<String, String>>,
}

impl IngestConfig {
    pub fn default_config() -> IngestConfig {
        IngestConfig::from_toml(DEFAULT_CONFIG).expect("embedded default config is valid")
    }

    pub fn from_toml(text: &str) -> Result<IngestConfig> {
        let config: IngestConfig =
            toml::from_str(text).map_err(|e| Error::format(format!("ingest config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<IngestConfig> {
        let text = std::fs::read_to_string(path)?;
        IngestConfig::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        let required = [
            ("date", &self.columns.date),
            ("home_team", &self.columns.home_team),
            ("away_team", &self.columns.away_team),
            ("home_goals", &self.columns.home_goals),
            ("away_goals", &self.columns.away_goals),
        ];
        for (name, synonyms) in required {
            if synonyms.is_empty() {
                return Err(Error::invalid(format!(
                    "ingest config: no header synonyms for required column {name}"
                )));
            }
        }
        if self.leagues.is_empty() {
            return Err(Error::invalid("ingest config: no leagues defined"));
        }
        Ok(())
    }

    /// Canonical spelling of a team name within a league.
    pub fn canonical_team(&self, league_id: &str, raw: &str) -> String {
        let trimmed = raw.trim();
        self.aliases
            .get(league_id)
            .and_then(|map| map.get(trimmed))
            .cloned()
            .unwrap_or_else(|| trimmed.to_string())
    }

    /// Country and tier per league, used for promotion and relegation
    /// detection when building the season table.
    pub fn levels(&self) -> BTreeMap<String, LeagueLevel> {
        self.leagues
            .iter()
            .map(|(id, meta)| {
                (
                    id.clone(),
                    LeagueLevel {
                        country: meta.country.clone(),
                        tier: meta.tier,
                    },
                )
            })
            .collect()
    }
}
