//! Four-stage run orchestration: fan-out per stage on a bounded pool, stage
//! barriers, per-item retries and resumable on-disk artifacts.

mod assemble;
mod check;
mod layout;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, FAMILIES_PER_PROMPT};
use crate::domain::{Country, DayType, Season, StageId, WeatherSource};
use crate::gateway::{
    request_key, ChatBackend, ChatExchange, ChatMessage, ChatParams, Gateway, HttpChatBackend, ReplayBackend,
    RetryPolicy,
};
use crate::household::{
    family_id, has_behavior_errors, read_families, validate_behavior, validate_hvac, write_families,
    write_profile_csv,
};
use crate::parser::{
    extract_envelope, format_hourly_weather, format_weather_ranges, parse_consumption, parse_family_structures,
    parse_hourly_weather, parse_weather_ranges, wrap_envelope, Envelope, FamilyStructure, HourlyWeatherDay,
    SeasonalWeatherRanges,
};
use crate::prompts::{
    build_stage3_conversation, energy_patterns_messages, family_types_messages, stage_of_messages,
    weather_data_user_message, weather_ranges_messages,
};
use crate::transport::{OfflineTransport, Transport};
use crate::weather::{
    aggregate_tmy_to_season, fetch_tmy, has_errors, validate_hourly, validate_ranges, write_weather_csv, Severity,
};

pub use assemble::{assemble_from_disk, AssemblyOutcome};
pub use check::{validate_run_dir, Finding};
pub use layout::{write_atomic, RunLayout};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Setup(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemFailure {
    pub item: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: StageId,
    /// `llm` or `tmy`
    pub source: String,
    pub attempted: usize,
    pub succeeded: usize,
    pub failed: usize,
    /// Items whose output already existed.
    pub skipped: usize,
    /// Gateway calls, stage-level retries included.
    pub requests: usize,
    pub retries: usize,
    pub warnings: usize,
    pub failures: Vec<ItemFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub through: StageId,
    pub stages: Vec<StageReport>,
    pub yearly_outputs: Vec<String>,
    pub assembly_failures: Vec<ItemFailure>,
}

impl RunReport {
    pub fn has_failures(&self) -> bool {
        self.stages.iter().any(|s| s.failed > 0) || !self.assembly_failures.is_empty()
    }

    pub fn stage(&self, stage: StageId) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == stage)
    }
}

/// One line of `exchanges.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedExchange {
    pub stage: Option<StageId>,
    pub key: String,
    #[serde(flatten)]
    pub exchange: ChatExchange,
}

pub fn read_exchanges(path: &Path) -> Result<Vec<LoggedExchange>, PipelineError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(vec![]),
        Err(e) => return Err(io_err(path)(e)),
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| PipelineError::Setup(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// What the pipeline talks to. Replay configs always get an offline
/// transport, whatever is passed here.
#[derive(Clone)]
pub struct PipelineEnv {
    pub transport: Arc<dyn Transport>,
    /// Overrides the backend derived from the config.
    pub backend: Option<Arc<dyn ChatBackend>>,
}

impl PipelineEnv {
    pub fn new(transport: Arc<dyn Transport>) -> Self {
        PipelineEnv { transport, backend: None }
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    requests: usize,
    retries: usize,
    warnings: usize,
}

enum Outcome {
    Done(Tally),
    Skipped,
    Failed(String, Tally),
}

type ItemResult = (String, Outcome);

fn stage_report(stage: StageId, source: &str, results: Vec<ItemResult>) -> StageReport {
    let mut r = StageReport {
        stage,
        source: source.to_string(),
        attempted: 0,
        succeeded: 0,
        failed: 0,
        skipped: 0,
        requests: 0,
        retries: 0,
        warnings: 0,
        failures: vec![],
    };
    for (item, outcome) in results {
        let t = match outcome {
            Outcome::Skipped => {
                r.skipped += 1;
                continue;
            }
            Outcome::Done(t) => {
                r.succeeded += 1;
                t
            }
            Outcome::Failed(error, t) => {
                r.failed += 1;
                r.failures.push(ItemFailure { item, error });
                t
            }
        };
        r.attempted += 1;
        r.requests += t.requests;
        r.retries += t.retries;
        r.warnings += t.warnings;
    }
    r.failures.sort_by(|a, b| a.item.cmp(&b.item));
    r
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    layout: RunLayout,
    gateway: Gateway,
    params: ChatParams,
    transport: Arc<dyn Transport>,
    pool: rayon::ThreadPool,
}

/// Accepted value plus the number of warning-level findings.
type Accepted<T> = Result<(T, usize), String>;

impl Runner<'_> {
    fn write(&self, path: &Path, text: &str) -> Result<(), String> {
        write_atomic(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Sends `messages` up to `1 + max_retries` times until `accept` takes
    /// the response. Gateway errors end the item at once; the gateway has
    /// already retried transport failures.
    fn attempt<T>(
        &self,
        stage: StageId,
        item: &str,
        messages: &[ChatMessage],
        accept: impl Fn(&str) -> Accepted<T>,
    ) -> Result<(T, String, Tally), (String, Tally)> {
        let mut tally = Tally::default();
        let mut last = String::new();
        for attempt in 0..=self.cfg.max_retries {
            if attempt > 0 {
                tally.retries += 1;
            }
            tally.requests += 1;
            let ex = match self.gateway.complete(messages, &self.params.with_attempt(attempt)) {
                Ok(ex) => ex,
                Err(e) => return Err((e.to_string(), tally)),
            };
            match accept(&ex.response_text) {
                Ok((value, warnings)) => {
                    tally.warnings += warnings;
                    self.write(&self.layout.raw(stage, item), &ex.response_text).map_err(|e| (e, tally))?;
                    return Ok((value, ex.response_text, tally));
                }
                Err(reason) => {
                    log::warn!("{stage} {item} attempt {attempt} rejected: {reason}");
                    let _ = write_atomic(&self.layout.rejected(stage, item, attempt), ex.response_text.as_bytes());
                    last = reason;
                }
            }
        }
        Err((format!("rejected after {} attempts: {last}", self.cfg.max_retries + 1), tally))
    }

    fn family_types(&self) -> StageReport {
        let results: Vec<ItemResult> = self.pool.install(|| {
            self.cfg
                .countries
                .par_iter()
                .map(|&c| {
                    let item = c.slug().to_string();
                    let path = self.layout.families(c);
                    if path.exists() {
                        return (item, Outcome::Skipped);
                    }
                    let messages = match family_types_messages(c) {
                        Ok(m) => m,
                        Err(e) => return (item, Outcome::Failed(e.to_string(), Tally::default())),
                    };
                    let accept = |raw: &str| -> Accepted<Vec<FamilyStructure>> {
                        let env = extract_envelope(raw).map_err(|e| e.to_string())?;
                        let fams = parse_family_structures(&env, c, FAMILIES_PER_PROMPT).map_err(|e| e.to_string())?;
                        Ok((fams, 0))
                    };
                    let outcome = match self.attempt(StageId::FamilyTypes, &item, &messages, accept) {
                        Ok((fams, _, t)) => match write_families(&path, &fams) {
                            Ok(()) => Outcome::Done(t),
                            Err(e) => Outcome::Failed(e.to_string(), t),
                        },
                        Err((e, t)) => Outcome::Failed(e, t),
                    };
                    (item, outcome)
                })
                .collect()
        });
        stage_report(StageId::FamilyTypes, "llm", results)
    }

    fn weather_ranges(&self) -> StageReport {
        let results: Vec<ItemResult> = self.pool.install(|| {
            self.cfg
                .countries
                .par_iter()
                .map(|&c| {
                    let item = c.slug().to_string();
                    let path = self.layout.ranges(c);
                    if path.exists() {
                        return (item, Outcome::Skipped);
                    }
                    let messages = match weather_ranges_messages(c, self.cfg.year) {
                        Ok(m) => m,
                        Err(e) => return (item, Outcome::Failed(e.to_string(), Tally::default())),
                    };
                    let accept = |raw: &str| -> Accepted<SeasonalWeatherRanges> {
                        let env = extract_envelope(raw).map_err(|e| e.to_string())?;
                        let ranges = parse_weather_ranges(&env, c).map_err(|e| e.to_string())?;
                        let v = validate_ranges(&ranges);
                        if has_errors(&v) {
                            return Err(join(&v));
                        }
                        Ok((ranges, v.len()))
                    };
                    let outcome = match self.attempt(StageId::WeatherRanges, &item, &messages, accept) {
                        Ok((ranges, _, t)) => match self.write(&path, &(format_weather_ranges(&ranges) + "\n")) {
                            Ok(()) => Outcome::Done(t),
                            Err(e) => Outcome::Failed(e, t),
                        },
                        Err((e, t)) => Outcome::Failed(e, t),
                    };
                    (item, outcome)
                })
                .collect()
        });
        stage_report(StageId::WeatherRanges, "llm", results)
    }

    fn weather_data_llm(&self) -> StageReport {
        let results: Vec<Vec<ItemResult>> = self
            .pool
            .install(|| self.cfg.countries.par_iter().map(|&c| self.weather_country(c)).collect());
        stage_report(StageId::WeatherData, "llm", results.into_iter().flatten().collect())
    }

    /// Seasons of one country run in order inside one conversation.
    fn weather_country(&self, c: Country) -> Vec<ItemResult> {
        let seasons = &self.cfg.seasons;
        let item = |s: Season| format!("{}_{}", c.slug(), s.name().to_lowercase());
        let ranges = match load_ranges(&self.layout, c) {
            Ok(r) => r,
            Err(e) => {
                let msg = format!("no weather ranges: {e}");
                return seasons.iter().map(|&s| (item(s), Outcome::Failed(msg.clone(), Tally::default()))).collect();
            }
        };
        let mut out = Vec::new();
        let mut prior: Vec<(ChatMessage, ChatMessage)> = Vec::new();
        for (i, &season) in seasons.iter().enumerate() {
            let id = item(season);
            if out.iter().any(|(_, o)| matches!(o, Outcome::Failed(..))) {
                out.push((id, Outcome::Failed("an earlier season of the conversation failed".into(), Tally::default())));
                continue;
            }
            let path = self.layout.weather_day(c, season);
            let user = match weather_data_user_message(c, self.cfg.year, season, &ranges) {
                Ok(u) => u,
                Err(e) => {
                    out.push((id, Outcome::Failed(e.to_string(), Tally::default())));
                    continue;
                }
            };
            if path.exists() {
                let reply = match fs::read_to_string(self.layout.raw(StageId::WeatherData, &id)) {
                    Ok(raw) => raw,
                    Err(_) => match load_weather_day(&self.layout, c, season) {
                        Ok(day) => wrap_envelope(&format_hourly_weather(&day)),
                        Err(e) => {
                            out.push((id, Outcome::Failed(e, Tally::default())));
                            continue;
                        }
                    },
                };
                prior.push((user, ChatMessage::assistant(reply)));
                out.push((id, Outcome::Skipped));
                continue;
            }
            let messages = match build_stage3_conversation(c, self.cfg.year, seasons, i, &ranges, &prior) {
                Ok(m) => m,
                Err(e) => {
                    out.push((id, Outcome::Failed(e.to_string(), Tally::default())));
                    continue;
                }
            };
            let accept = |raw: &str| -> Accepted<HourlyWeatherDay> {
                let env = extract_envelope(raw).map_err(|e| e.to_string())?;
                let day = parse_hourly_weather(&env, c, season).map_err(|e| e.to_string())?;
                let v = validate_hourly(&day, Some(&ranges));
                if has_errors(&v) {
                    return Err(join(&v));
                }
                Ok((day, v.len()))
            };
            let outcome = match self.attempt(StageId::WeatherData, &id, &messages, accept) {
                Ok((day, raw, t)) => match self.write(&path, &(format_hourly_weather(&day) + "\n")) {
                    Ok(()) => {
                        prior.push((user, ChatMessage::assistant(raw)));
                        Outcome::Done(t)
                    }
                    Err(e) => Outcome::Failed(e, t),
                },
                Err((e, t)) => Outcome::Failed(e, t),
            };
            out.push((id, outcome));
        }
        out
    }

    fn weather_data_tmy(&self) -> StageReport {
        let results: Vec<Vec<ItemResult>> = self.pool.install(|| {
            self.cfg
                .countries
                .par_iter()
                .map(|&c| {
                    let item = |s: Season| format!("{}_{}", c.slug(), s.name().to_lowercase());
                    let pending: Vec<Season> =
                        self.cfg.seasons.iter().copied().filter(|&s| !self.layout.weather_day(c, s).exists()).collect();
                    let mut out: Vec<ItemResult> = self
                        .cfg
                        .seasons
                        .iter()
                        .filter(|s| !pending.contains(s))
                        .map(|&s| (item(s), Outcome::Skipped))
                        .collect();
                    if pending.is_empty() {
                        return out;
                    }
                    let fail_all = |out: &mut Vec<ItemResult>, msg: String| {
                        out.extend(pending.iter().map(|&s| (item(s), Outcome::Failed(msg.clone(), Tally::default()))));
                    };
                    let Some(capital) = self.cfg.capitals.get(c) else {
                        fail_all(&mut out, format!("no capital configured for {c}"));
                        return out;
                    };
                    let series = match fetch_tmy(
                        capital,
                        self.transport.as_ref(),
                        &self.cfg.tmy_endpoint,
                        &self.cfg.tmy_cache_dir(),
                        self.cfg.request_timeout,
                    ) {
                        Ok(s) => s,
                        Err(e) => {
                            fail_all(&mut out, e.to_string());
                            return out;
                        }
                    };
                    let days = aggregate_tmy_to_season(&series, c);
                    for &s in &pending {
                        let day = &days[&s];
                        // measured data: findings are reported, never rejected
                        let t = Tally { warnings: validate_hourly(day, None).len(), ..Tally::default() };
                        let outcome = match self.write(&self.layout.weather_day(c, s), &(format_hourly_weather(day) + "\n")) {
                            Ok(()) => Outcome::Done(t),
                            Err(e) => Outcome::Failed(e, t),
                        };
                        out.push((item(s), outcome));
                    }
                    out
                })
                .collect()
        });
        stage_report(StageId::WeatherData, "tmy", results.into_iter().flatten().collect())
    }

    fn write_weather_csvs(&self) -> Result<(), PipelineError> {
        for &c in &self.cfg.countries {
            let days: Result<Vec<HourlyWeatherDay>, String> =
                Season::ALL.iter().map(|&s| load_weather_day(&self.layout, c, s)).collect();
            if let Ok(days) = days {
                let path = self.layout.weather_csv(c);
                let refs: Vec<&HourlyWeatherDay> = days.iter().collect();
                write_weather_csv(&path, &refs).map_err(|e| PipelineError::Setup(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(())
    }

    fn energy_patterns(&self) -> StageReport {
        struct Work {
            item: String,
            country: Country,
            family: Option<(String, FamilyStructure)>,
            season: Season,
            day_type: DayType,
            blocked: Option<String>,
        }
        let n = self.cfg.families_per_country;
        let mut work = Vec::new();
        for &c in &self.cfg.countries {
            let families = read_families(&self.layout.families(c), c).map_err(|e| e.to_string());
            let weather: BTreeMap<Season, Result<HourlyWeatherDay, String>> =
                self.cfg.seasons.iter().map(|&s| (s, load_weather_day(&self.layout, c, s))).collect();
            for i in 0..n {
                let family = match &families {
                    Ok(f) if i < f.len() => Ok((family_id(i, &f[i]), f[i].clone())),
                    Ok(f) => Err(format!("only {} families available", f.len())),
                    Err(e) => Err(format!("no families: {e}")),
                };
                for &season in &self.cfg.seasons {
                    for day_type in DayType::ALL {
                        let fid = family.as_ref().map(|f| f.0.clone()).unwrap_or_else(|_| format!("f{}", i + 1));
                        let blocked = match (&family, &weather[&season]) {
                            (Err(e), _) => Some(e.clone()),
                            (_, Err(e)) => Some(format!("no {season} weather: {e}")),
                            _ => None,
                        };
                        work.push(Work {
                            item: format!(
                                "{}_{fid}_{}_{}",
                                c.slug(),
                                season.name().to_lowercase(),
                                day_type.name().to_lowercase()
                            ),
                            country: c,
                            family: family.clone().ok(),
                            season,
                            day_type,
                            blocked,
                        });
                    }
                }
            }
        }
        let results: Vec<ItemResult> = self.pool.install(|| {
            work.par_iter()
                .map(|w| {
                    if let Some(reason) = &w.blocked {
                        return (w.item.clone(), Outcome::Failed(reason.clone(), Tally::default()));
                    }
                    let (fid, family) = w.family.as_ref().expect("unblocked item has a family");
                    let path = self.layout.profile(w.country, fid, w.season, w.day_type);
                    if path.exists() {
                        return (w.item.clone(), Outcome::Skipped);
                    }
                    let weather = match load_weather_day(&self.layout, w.country, w.season) {
                        Ok(d) => d,
                        Err(e) => return (w.item.clone(), Outcome::Failed(e, Tally::default())),
                    };
                    let messages = match energy_patterns_messages(family, self.cfg.year, w.season, w.day_type, &weather) {
                        Ok(m) => m,
                        Err(e) => return (w.item.clone(), Outcome::Failed(e.to_string(), Tally::default())),
                    };
                    let accept = |raw: &str| -> Accepted<_> {
                        let env = extract_envelope(raw).map_err(|e| e.to_string())?;
                        let p = parse_consumption(&env, family, w.season, w.day_type).map_err(|e| e.to_string())?;
                        let v = validate_behavior(&p, w.day_type);
                        if has_behavior_errors(&v) {
                            let errors: Vec<String> =
                                v.iter().filter(|x| x.severity == Severity::Error).map(|x| x.to_string()).collect();
                            return Err(errors.join("; "));
                        }
                        let warnings = v.len() + validate_hvac(&p, &weather).len();
                        Ok((p, warnings))
                    };
                    let outcome = match self.attempt(StageId::EnergyPatterns, &w.item, &messages, accept) {
                        Ok((p, _, t)) => match write_profile_csv(&path, &p) {
                            Ok(()) => Outcome::Done(t),
                            Err(e) => Outcome::Failed(e.to_string(), t),
                        },
                        Err((e, t)) => Outcome::Failed(e, t),
                    };
                    (w.item.clone(), outcome)
                })
                .collect()
        });
        stage_report(StageId::EnergyPatterns, "llm", results)
    }

    /// Merges this stage's exchanges into `exchanges.jsonl`, keeping the
    /// file sorted by stage, request key and attempt.
    fn flush_exchanges(&self) -> Result<(), PipelineError> {
        let fresh = self.gateway.log().drain();
        if fresh.is_empty() {
            return Ok(());
        }
        let path = self.layout.exchanges();
        let mut all = read_exchanges(&path)?;
        all.extend(fresh.into_iter().map(|ex| LoggedExchange {
            stage: stage_of_messages(&ex.request_messages),
            key: request_key(&ex.request_messages, &ex.params()),
            exchange: ex,
        }));
        all.sort_by(|a, b| (a.stage, &a.key, a.exchange.attempt).cmp(&(b.stage, &b.key, b.exchange.attempt)));
        all.dedup_by(|a, b| a.key == b.key && a.exchange.attempt == b.exchange.attempt);
        let mut text = String::new();
        for e in &all {
            text.push_str(&serde_json::to_string(e).expect("exchange serializes"));
            text.push('\n');
        }
        write_atomic(&path, text.as_bytes()).map_err(io_err(&path))
    }
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub(crate) fn load_ranges(layout: &RunLayout, c: Country) -> Result<SeasonalWeatherRanges, String> {
    let path = layout.ranges(c);
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_weather_ranges(&Envelope::from_inner(text.trim()), c).map_err(|e| format!("{}: {e}", path.display()))
}

pub(crate) fn load_weather_day(layout: &RunLayout, c: Country, s: Season) -> Result<HourlyWeatherDay, String> {
    let path = layout.weather_day(c, s);
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_hourly_weather(&Envelope::from_inner(text.trim()), c, s).map_err(|e| format!("{}: {e}", path.display()))
}

fn backend_for(cfg: &RunConfig, env: &PipelineEnv, transport: &Arc<dyn Transport>) -> Result<Arc<dyn ChatBackend>, PipelineError> {
    if let Some(b) = &env.backend {
        return Ok(b.clone());
    }
    if let Some(dir) = &cfg.fixture_dir {
        return Ok(Arc::new(ReplayBackend::new(dir.clone())));
    }
    let key = cfg.api_key();
    if key.is_none() {
        log::warn!("environment variable {} is not set; requests go out unauthenticated", cfg.api_key_ref);
    }
    Ok(Arc::new(HttpChatBackend::new(&cfg.endpoint_url, key, transport.clone(), cfg.request_timeout)))
}

/// Runs every stage up to and including `through`, then assembles yearly
/// profiles when Stage 4 ran. Item failures are reported, not returned.
pub fn run_pipeline(cfg: &RunConfig, through: StageId, env: &PipelineEnv) -> Result<RunReport, PipelineError> {
    if !cfg.capitals.covers(&cfg.countries) && cfg.weather_source == WeatherSource::External {
        return Err(PipelineError::Setup("capital registry does not cover every configured country".into()));
    }
    let transport: Arc<dyn Transport> =
        if cfg.is_replay() { Arc::new(OfflineTransport::default()) } else { env.transport.clone() };
    let backend = backend_for(cfg, env, &transport)?;
    let retry = RetryPolicy { max_retries: cfg.max_retries, base: cfg.retry_base, ..RetryPolicy::default() };
    let mut gateway = Gateway::new(backend, retry);
    if let Some(dir) = &cfg.record_dir {
        if !cfg.is_replay() {
            gateway = gateway.with_recording(dir.clone());
        }
    }
    let layout = RunLayout::new(cfg.output_dir.clone());
    fs::create_dir_all(layout.root()).map_err(io_err(layout.root()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| PipelineError::Setup(e.to_string()))?;
    let runner = Runner {
        cfg,
        layout,
        gateway,
        params: ChatParams {
            model_id: cfg.model_id.clone(),
            temperature: cfg.temperature,
            max_tokens: cfg.max_tokens,
            attempt: 0,
        },
        transport,
        pool,
    };

    let mut stages = Vec::new();
    for stage in StageId::ALL.into_iter().filter(|s| *s <= through) {
        let report = match (stage, cfg.weather_source) {
            (StageId::FamilyTypes, _) => runner.family_types(),
            (StageId::WeatherRanges, WeatherSource::External) => continue,
            (StageId::WeatherRanges, WeatherSource::Llm) => runner.weather_ranges(),
            (StageId::WeatherData, WeatherSource::Llm) => runner.weather_data_llm(),
            (StageId::WeatherData, WeatherSource::External) => runner.weather_data_tmy(),
            (StageId::EnergyPatterns, _) => runner.energy_patterns(),
        };
        runner.flush_exchanges()?;
        if stage == StageId::WeatherData {
            runner.write_weather_csvs()?;
        }
        log::info!(
            "{stage}: {} succeeded, {} failed, {} skipped, {} requests",
            report.succeeded,
            report.failed,
            report.skipped,
            report.requests
        );
        stages.push(report);
    }

    let (yearly_outputs, assembly_failures) = if through == StageId::EnergyPatterns {
        let out = assemble_from_disk(cfg, &runner.layout)?;
        (out.written, out.failures)
    } else {
        (vec![], vec![])
    };
    let report = RunReport { through, stages, yearly_outputs, assembly_failures };
    let path = runner.layout.report();
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_atomic(&path, text.as_bytes()).map_err(io_err(&path))?;
    Ok(report)
}
