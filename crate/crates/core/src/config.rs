//! Run configuration: TOML file, command-line overrides and defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::Weekday;
use serde::Deserialize;

use crate::domain::{Country, Season, WeatherSource};
use crate::weather::{Capital, CapitalRegistry};

/// Number of family types the Stage-1 prompt asks for.
pub const FAMILIES_PER_PROMPT: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub countries: Vec<Country>,
    pub year: i32,
    pub families_per_country: usize,
    pub seasons: Vec<Season>,
    pub weather_source: WeatherSource,
    pub model_id: String,
    pub endpoint_url: String,
    /// Name of the environment variable holding the API key.
    pub api_key_ref: String,
    pub max_retries: u32,
    pub parallelism: usize,
    pub output_dir: PathBuf,
    /// Replay mode: answer every chat request from recorded fixtures.
    pub fixture_dir: Option<PathBuf>,
    /// Record every live exchange as a fixture into this directory.
    pub record_dir: Option<PathBuf>,
    /// A holiday file (applied to every country) or a directory of
    /// `<country-slug>.csv` files.
    pub holiday_file: Option<PathBuf>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub request_timeout: Duration,
    pub retry_base: Duration,
    pub tmy_endpoint: String,
    pub tmy_cache_dir: Option<PathBuf>,
    pub balance_point: f64,
    pub capitals: CapitalRegistry,
    /// Weekend days per country, Monday-first order, overriding the built-in calendar.
    pub weekends: BTreeMap<Country, Vec<Weekday>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            countries: Country::ALL.to_vec(),
            year: 2024,
            families_per_country: FAMILIES_PER_PROMPT,
            seasons: Season::ALL.to_vec(),
            weather_source: WeatherSource::Llm,
            model_id: "meta-llama/Meta-Llama-3.1-405B-Instruct".into(),
            endpoint_url: "https://api.deepinfra.com/v1/openai".into(),
            api_key_ref: "SYNTHGRID_API_KEY".into(),
            max_retries: 3,
            parallelism: 4,
            output_dir: PathBuf::from("out"),
            fixture_dir: None,
            record_dir: None,
            holiday_file: None,
            temperature: 0.7,
            max_tokens: 8192,
            request_timeout: Duration::from_secs(600),
            retry_base: Duration::from_secs(2),
            tmy_endpoint: "https://re.jrc.ec.europa.eu/api/v5_2".into(),
            tmy_cache_dir: None,
            balance_point: 18.0,
            capitals: CapitalRegistry::default(),
            weekends: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    countries: Option<Vec<String>>,
    year: Option<i32>,
    families_per_country: Option<i64>,
    seasons: Option<Vec<String>>,
    weather_source: Option<WeatherSource>,
    model_id: Option<String>,
    endpoint_url: Option<String>,
    api_key_ref: Option<String>,
    max_retries: Option<u32>,
    parallelism: Option<i64>,
    output_dir: Option<PathBuf>,
    fixture_dir: Option<PathBuf>,
    record_dir: Option<PathBuf>,
    holiday_file: Option<PathBuf>,
    temperature: Option<f64>,
    max_tokens: Option<u32>,
    request_timeout_secs: Option<f64>,
    retry_base_secs: Option<f64>,
    tmy_endpoint: Option<String>,
    tmy_cache_dir: Option<PathBuf>,
    balance_point: Option<f64>,
    #[serde(default)]
    capitals: BTreeMap<String, Capital>,
    #[serde(default)]
    weekends: BTreeMap<String, Vec<String>>,
}

/// Loads `path`, applies `overrides` (`key=value`, value in TOML syntax or
/// a bare string) on top, and fills the rest from defaults.
pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, &path.display().to_string(), overrides)
}

pub fn parse_config(
    text: &str,
    origin: &str,
    overrides: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    for (key, value) in overrides {
        table.insert(key.clone(), override_value(value));
    }
    let raw: RawConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    resolve(raw)
}

fn override_value(value: &str) -> toml::Value {
    let doc = format!("v = {value}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(value.into())),
        Err(_) => toml::Value::String(value.to_string()),
    }
}

/// Parses `key=value` into a pair.
pub fn parse_override(s: &str) -> Result<(String, String), ConfigError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Invalid(format!("override '{s}' is not key=value"))),
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let invalid = |m: String| ConfigError::Invalid(m);

    if let Some(names) = raw.countries {
        let mut countries = Vec::new();
        for name in &names {
            let c: Country = name.parse().map_err(|e: crate::domain::UnknownName| invalid(e.to_string()))?;
            if countries.contains(&c) {
                return Err(invalid(format!("country '{name}' listed twice")));
            }
            countries.push(c);
        }
        if countries.is_empty() {
            return Err(invalid("countries must not be empty".into()));
        }
        cfg.countries = countries;
    }
    if let Some(y) = raw.year {
        if !(1900..=2200).contains(&y) {
            return Err(invalid(format!("year {y} out of range")));
        }
        cfg.year = y;
    }
    if let Some(n) = raw.families_per_country {
        if n < 1 || n as usize > FAMILIES_PER_PROMPT {
            return Err(invalid(format!(
                "families_per_country must be in 1..={FAMILIES_PER_PROMPT}, got {n}"
            )));
        }
        cfg.families_per_country = n as usize;
    }
    if let Some(names) = raw.seasons {
        let seasons = names
            .iter()
            .map(|s| s.parse::<Season>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(e.to_string()))?;
        let distinct: BTreeSet<_> = seasons.iter().collect();
        if seasons.len() != 4 || distinct.len() != 4 {
            return Err(invalid(format!(
                "seasons must be a permutation of Winter, Spring, Summer, Autumn; got {names:?}"
            )));
        }
        cfg.seasons = seasons;
    }
    if let Some(ws) = raw.weather_source {
        cfg.weather_source = ws;
    }
    if let Some(v) = raw.model_id {
        cfg.model_id = v;
    }
    if let Some(v) = raw.endpoint_url {
        cfg.endpoint_url = v.trim_end_matches('/').to_string();
    }
    if let Some(v) = raw.api_key_ref {
        cfg.api_key_ref = v;
    }
    if let Some(v) = raw.max_retries {
        cfg.max_retries = v;
    }
    if let Some(p) = raw.parallelism {
        if p < 1 {
            return Err(invalid(format!("parallelism must be >= 1, got {p}")));
        }
        cfg.parallelism = p as usize;
    }
    if let Some(v) = raw.output_dir {
        cfg.output_dir = v;
    }
    cfg.fixture_dir = raw.fixture_dir;
    cfg.record_dir = raw.record_dir;
    cfg.holiday_file = raw.holiday_file;
    if let Some(t) = raw.temperature {
        if !(0.0..=2.0).contains(&t) {
            return Err(invalid(format!("temperature must be in [0, 2], got {t}")));
        }
        cfg.temperature = t;
    }
    if let Some(v) = raw.max_tokens {
        cfg.max_tokens = v;
    }
    if let Some(s) = raw.request_timeout_secs {
        cfg.request_timeout = secs(s).ok_or_else(|| invalid(format!("bad request_timeout_secs {s}")))?;
    }
    if let Some(s) = raw.retry_base_secs {
        cfg.retry_base = secs(s).ok_or_else(|| invalid(format!("bad retry_base_secs {s}")))?;
    }
    if let Some(v) = raw.tmy_endpoint {
        cfg.tmy_endpoint = v.trim_end_matches('/').to_string();
    }
    cfg.tmy_cache_dir = raw.tmy_cache_dir;
    if let Some(b) = raw.balance_point {
        cfg.balance_point = b;
    }
    for (name, capital) in raw.capitals {
        let c: Country = name.parse().map_err(|e: crate::domain::UnknownName| invalid(e.to_string()))?;
        if capital.latitude.abs() > 90.0 || capital.longitude.abs() > 180.0 {
            return Err(invalid(format!("capital for {c} has invalid coordinates")));
        }
        cfg.capitals.set(c, capital);
    }
    for (name, days) in raw.weekends {
        let c: Country = name.parse().map_err(|e: crate::domain::UnknownName| invalid(e.to_string()))?;
        let mut set = days
            .iter()
            .map(|d| d.parse::<Weekday>().map_err(|_| invalid(format!("bad weekday '{d}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        set.sort_by_key(|d| d.num_days_from_monday());
        set.dedup();
        if set.is_empty() || set.len() > 3 {
            return Err(invalid(format!("weekend for {c} must have 1 to 3 days")));
        }
        cfg.weekends.insert(c, set);
    }
    Ok(cfg)
}

fn secs(s: f64) -> Option<Duration> {
    (s.is_finite() && s >= 0.0).then(|| Duration::from_secs_f64(s))
}

impl RunConfig {
    pub fn is_replay(&self) -> bool {
        self.fixture_dir.is_some()
    }

    pub fn tmy_cache_dir(&self) -> PathBuf {
        self.tmy_cache_dir
            .clone()
            .unwrap_or_else(|| self.output_dir.join("tmy_cache"))
    }

    pub fn api_key(&self) -> Option<String> {
        std::env::var(&self.api_key_ref).ok().filter(|k| !k.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(k: &str, v: &str) -> (String, String) {
        (k.to_string(), v.to_string())
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("", "<test>", &[]).unwrap();
        assert_eq!(cfg.countries, Country::ALL.to_vec());
        assert_eq!(
            cfg.countries.iter().map(|c| c.name()).collect::<Vec<_>>(),
            ["USA", "Japan", "India", "Sweden", "United Arab Emirates", "Brazil"]
        );
        assert_eq!(cfg.families_per_country, 5);
        assert_eq!(cfg.seasons, Season::ALL.to_vec());
        assert_eq!(cfg.weather_source, WeatherSource::Llm);
    }

    #[test]
    fn flags_override_file() {
        let cfg = parse_config("countries = [\"India\"]\nyear = 2023\n", "<test>", &[ov("year", "2024")]).unwrap();
        assert_eq!(cfg.countries, vec![Country::India]);
        assert_eq!(cfg.year, 2024);
    }

    #[test]
    fn string_override_without_quotes() {
        let cfg = parse_config("", "<test>", &[ov("model_id", "microsoft/phi-4"), ov("weather_source", "external")])
            .unwrap();
        assert_eq!(cfg.model_id, "microsoft/phi-4");
        assert_eq!(cfg.weather_source, WeatherSource::External);
    }

    #[test]
    fn seasons_must_be_a_permutation() {
        let err = parse_config("seasons = [\"Winter\", \"Winter\", \"Summer\", \"Autumn\"]", "<test>", &[])
            .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(m) if m.contains("permutation")));
        let cfg = parse_config("seasons = [\"Summer\", \"Autumn\", \"Winter\", \"Spring\"]", "<test>", &[]).unwrap();
        assert_eq!(cfg.seasons[0], Season::Summer);
    }

    #[test]
    fn unknown_country_lists_supported_names() {
        let err = parse_config("countries = [\"Atlantis\"]", "<test>", &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Atlantis") && msg.contains("Sweden"), "{msg}");
    }

    #[test]
    fn malformed_file_reports_line() {
        let err = parse_config("year = 2024\ncountries = [\"USA\"\n", "cfg.toml", &[]).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, ConfigError::Parse { .. }));
        assert!(msg.contains("line 2") || msg.contains(":2:") || msg.contains("2 |"), "{msg}");
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(parse_config("families_per_country = 0", "<t>", &[]).is_err());
        assert!(parse_config("parallelism = 0", "<t>", &[]).is_err());
        assert!(parse_config("families_per_country = 6", "<t>", &[]).is_err());
        assert!(parse_config("unknown_key = 1", "<t>", &[]).is_err());
    }

    #[test]
    fn weekend_and_capital_overrides() {
        let text = r#"
[weekends]
UAE = ["Fri", "Sat"]

[capitals.Sweden]
name = "Gothenburg"
latitude = 57.7
longitude = 11.97
utc_offset_minutes = 60
"#;
        let cfg = parse_config(text, "<t>", &[]).unwrap();
        assert_eq!(
            cfg.weekends[&Country::Uae],
            vec![Weekday::Fri, Weekday::Sat]
        );
        assert_eq!(cfg.capitals.get(Country::Sweden).unwrap().name, "Gothenburg");
    }

    #[test]
    fn parse_override_pairs() {
        assert_eq!(parse_override("year=2023").unwrap(), ov("year", "2023"));
        assert!(parse_override("noequals").is_err());
    }
}
