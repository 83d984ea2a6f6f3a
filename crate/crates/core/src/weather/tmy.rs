//! PVGIS typical-meteorological-year client, disk cache and per-season
//! aggregation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{Datelike, NaiveDate, Timelike};
use serde::Deserialize;

use super::Capital;
use crate::domain::{Country, Season, WeatherParameter};
use crate::numeric::Decimal;
use crate::parser::{HourlyEntry, HourlyWeatherDay, HOURS};
use crate::transport::Transport;

pub const TMY_HOURS: usize = 8760;
pub const TMY_LABEL: &str = "TMY-mean";
/// Display precision of aggregated values.
const TMY_PLACES: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum TmyError {
    #[error("invalid coordinates ({lat}, {lon})")]
    Coord { lat: f64, lon: f64 },
    #[error("TMY service: {0}")]
    Transport(String),
    #[error("malformed TMY payload: {0}")]
    Parse(String),
    #[error("TMY cache {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TmyLocation {
    pub latitude: f64,
    pub longitude: f64,
    pub name: String,
}

/// One hour of the typical year, in local standard time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmyRecord {
    pub month: u32,
    pub day: u32,
    pub hour: u32,
    pub temperature: f64,
    pub humidity: f64,
    pub direct_normal: f64,
    pub diffuse_horizontal: f64,
    pub wind_speed: f64,
}

impl TmyRecord {
    pub fn value(&self, p: WeatherParameter) -> f64 {
        match p {
            WeatherParameter::Temperature => self.temperature,
            WeatherParameter::Humidity => self.humidity,
            WeatherParameter::SolRadDirect => self.direct_normal,
            WeatherParameter::SolRadDiffuse => self.diffuse_horizontal,
            WeatherParameter::WindSpeed => self.wind_speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TmySeries {
    pub location: TmyLocation,
    pub records: Vec<TmyRecord>,
}

pub fn tmy_url(endpoint: &str, lat: f64, lon: f64) -> String {
    format!("{}/tmy?lat={lat}&lon={lon}&outputformat=json", endpoint.trim_end_matches('/'))
}

pub fn cache_path(dir: &Path, lat: f64, lon: f64) -> PathBuf {
    dir.join(format!("tmy_{lat}_{lon}.json"))
}

fn check_coords(lat: f64, lon: f64) -> Result<(), TmyError> {
    if lat.is_finite() && lon.is_finite() && lat.abs() <= 90.0 && lon.abs() <= 180.0 {
        Ok(())
    } else {
        Err(TmyError::Coord { lat, lon })
    }
}

#[derive(Deserialize)]
struct Payload {
    outputs: Outputs,
}

#[derive(Deserialize)]
struct Outputs {
    tmy_hourly: Vec<HourRow>,
}

#[derive(Deserialize)]
struct HourRow {
    #[serde(rename = "time(UTC)")]
    time: String,
    #[serde(rename = "T2m")]
    t2m: f64,
    #[serde(rename = "RH")]
    rh: f64,
    #[serde(rename = "Gb(n)")]
    gb_n: f64,
    #[serde(rename = "Gd(h)")]
    gd_h: f64,
    #[serde(rename = "WS10m")]
    ws10m: f64,
}

/// `YYYYMMDD:HHMM` → (month, day, hour).
fn parse_time(s: &str) -> Option<(u32, u32, u32)> {
    let (date, time) = s.split_once(':')?;
    if date.len() != 8 || time.len() != 4 {
        return None;
    }
    let month = date[4..6].parse().ok()?;
    let day = date[6..8].parse().ok()?;
    let hour = time[..2].parse().ok()?;
    Some((month, day, hour))
}

/// Month, day and hour of hour-index `i` in a non-leap year.
fn calendar_hour(i: usize) -> (u32, u32, u32) {
    let t = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
        + chrono::Duration::hours(i as i64);
    (t.month(), t.day(), t.hour())
}

/// Parses a PVGIS TMY JSON payload. The service reports UTC; records are
/// rotated by the whole-hour part of `utc_offset_minutes` so hour-of-day is
/// local standard time, wrapping cyclically over the typical year.
pub fn parse_tmy_payload(text: &str, location: TmyLocation, utc_offset_minutes: i32) -> Result<TmySeries, TmyError> {
    let payload: Payload = serde_json::from_str(text).map_err(|e| TmyError::Parse(e.to_string()))?;
    let rows = payload.outputs.tmy_hourly;
    if rows.len() != TMY_HOURS {
        return Err(TmyError::Parse(format!("{} hourly rows, expected {TMY_HOURS}", rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        let when = parse_time(&r.time).ok_or_else(|| TmyError::Parse(format!("bad timestamp {:?}", r.time)))?;
        if when != calendar_hour(i) {
            return Err(TmyError::Parse(format!("row {i} has timestamp {:?} out of sequence", r.time)));
        }
        if !(0.0..=100.0).contains(&r.rh) {
            return Err(TmyError::Parse(format!("row {i}: humidity {} outside [0, 100]", r.rh)));
        }
        if r.gb_n < 0.0 || r.gd_h < 0.0 {
            return Err(TmyError::Parse(format!("row {i}: negative irradiance")));
        }
    }
    let shift = utc_offset_minutes.div_euclid(60) as i64;
    let n = TMY_HOURS as i64;
    let records = (0..TMY_HOURS)
        .map(|k| {
            let r = &rows[(k as i64 - shift).rem_euclid(n) as usize];
            let (month, day, hour) = calendar_hour(k);
            TmyRecord {
                month,
                day,
                hour,
                temperature: r.t2m,
                humidity: r.rh,
                direct_normal: r.gb_n,
                diffuse_horizontal: r.gd_h,
                wind_speed: r.ws10m,
            }
        })
        .collect();
    Ok(TmySeries { location, records })
}

/// Returns the capital's typical year, reading the cache when present and
/// otherwise fetching and caching the verbatim payload.
pub fn fetch_tmy(
    capital: &Capital,
    transport: &dyn Transport,
    endpoint: &str,
    cache_dir: &Path,
    timeout: Duration,
) -> Result<TmySeries, TmyError> {
    let (lat, lon) = (capital.latitude, capital.longitude);
    check_coords(lat, lon)?;
    let location = TmyLocation { latitude: lat, longitude: lon, name: capital.name.clone() };
    let path = cache_path(cache_dir, lat, lon);
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| TmyError::Io { path, source }
    };
    if path.exists() {
        let text = fs::read_to_string(&path).map_err(io(&path))?;
        return parse_tmy_payload(&text, location, capital.utc_offset_minutes);
    }
    let url = tmy_url(endpoint, lat, lon);
    log::info!("fetching TMY for {} from {url}", capital.name);
    let resp = transport.get(&url, timeout).map_err(|e| TmyError::Transport(e.to_string()))?;
    if resp.status != 200 {
        return Err(TmyError::Transport(format!("HTTP {}: {}", resp.status, resp.body.chars().take(300).collect::<String>())));
    }
    let series = parse_tmy_payload(&resp.body, location, capital.utc_offset_minutes)?;
    fs::create_dir_all(cache_dir).map_err(io(cache_dir))?;
    let tmp = cache_dir.join(format!(".tmy_{lat}_{lon}.{}.tmp", std::process::id()));
    fs::write(&tmp, &resp.body).map_err(io(&tmp))?;
    // create-once: if another writer got there first, keep theirs
    if fs::hard_link(&tmp, &path).is_err() && !path.exists() {
        fs::rename(&tmp, &path).map_err(io(&path))?;
    }
    let _ = fs::remove_file(&tmp);
    Ok(series)
}

/// Mean of `values`, exact when every value is equal.
fn mean(values: &[f64]) -> f64 {
    let first = values[0];
    first + values.iter().map(|v| v - first).sum::<f64>() / values.len() as f64
}

/// Hour-of-day means over all days of each season, shaped like a Stage-3
/// response.
pub fn aggregate_tmy_to_season(series: &TmySeries, country: Country) -> BTreeMap<Season, HourlyWeatherDay> {
    let mut buckets: BTreeMap<(Season, usize), Vec<&TmyRecord>> = BTreeMap::new();
    for r in &series.records {
        buckets.entry((country.season_of_month(r.month), r.hour as usize)).or_default().push(r);
    }
    let mut out = BTreeMap::new();
    for season in Season::ALL {
        if !(0..HOURS).all(|h| buckets.contains_key(&(season, h))) {
            continue;
        }
        let series_map = WeatherParameter::ALL
            .iter()
            .map(|&p| {
                let entries = (0..HOURS)
                    .map(|h| {
                        let vals: Vec<f64> = buckets[&(season, h)].iter().map(|r| r.value(p)).collect();
                        HourlyEntry::new(h as u8, TMY_LABEL, Decimal::new(mean(&vals), TMY_PLACES))
                    })
                    .collect();
                (p, entries)
            })
            .collect();
        let day = HourlyWeatherDay::new(country, season, series_map).expect("24 hours per parameter");
        out.insert(season, day);
    }
    out
}
