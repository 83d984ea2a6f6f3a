//! Country calendars and full-year assembly of the seasonal daily profiles.

mod holidays;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Weekday};

use crate::config::ConfigError;
use crate::domain::{Country, DayType, Season, WeatherParameter};
use crate::numeric::Decimal;
use crate::parser::{DailyConsumptionProfile, HourlyWeatherDay, HOURS};

pub use holidays::{builtin_holidays, easter_sunday};

pub const DEFAULT_WEEKEND: [Weekday; 2] = [Weekday::Sat, Weekday::Sun];

#[derive(Debug, Clone, PartialEq)]
pub struct CountryCalendar {
    pub country: Country,
    pub year: i32,
    /// Sorted Monday-first, 1 to 3 days.
    pub weekend_days: Vec<Weekday>,
    pub holidays: BTreeMap<NaiveDate, String>,
}

impl CountryCalendar {
    /// A calendar with the default weekend and no holidays.
    pub fn plain(country: Country, year: i32) -> Self {
        CountryCalendar { country, year, weekend_days: DEFAULT_WEEKEND.to_vec(), holidays: BTreeMap::new() }
    }

    pub fn is_weekend_day(&self, date: NaiveDate) -> bool {
        self.weekend_days.contains(&date.weekday())
    }

    pub fn is_holiday(&self, date: NaiveDate) -> bool {
        self.holidays.contains_key(&date)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> {
        let year = self.year;
        NaiveDate::from_ymd_opt(year, 1, 1)
            .expect("valid year")
            .iter_days()
            .take_while(move |d| d.year() == year)
    }
}

pub fn days_in_year(year: i32) -> u32 {
    if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366
    } else {
        365
    }
}

/// When `path` is a directory the country file `<slug>.csv` inside it is
/// used; a missing country file means built-in holidays.
pub fn resolve_holiday_file(path: &Path, country: Country) -> Option<PathBuf> {
    if path.is_dir() {
        let f = path.join(format!("{}.csv", country.slug()));
        f.is_file().then_some(f)
    } else {
        Some(path.to_path_buf())
    }
}

/// Reads `YYYY-MM-DD,label` lines. Blank lines and `#` comments are
/// skipped; dates of other years are ignored.
pub fn read_holiday_file(path: &Path, year: i32) -> Result<BTreeMap<NaiveDate, String>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_holidays(&text, &path.display().to_string(), year)
}

pub fn parse_holidays(text: &str, origin: &str, year: i32) -> Result<BTreeMap<NaiveDate, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim().trim_start_matches('\u{feff}');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (date, label) = line.split_once(',').unwrap_or((line, ""));
        let err = |message: String| ConfigError::Parse { origin: format!("{origin}:{}", i + 1), message };
        let date = date.trim();
        if i == 0 && date.eq_ignore_ascii_case("date") {
            continue;
        }
        let d = NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|e| err(format!("bad date '{date}': {e}")))?;
        if d.year() != year {
            log::debug!("{origin}: skipping {d}, outside {year}");
            continue;
        }
        let label = label.trim().trim_matches('"');
        out.insert(d, if label.is_empty() { "Holiday".to_string() } else { label.to_string() });
    }
    Ok(out)
}

pub fn build_calendar(
    country: Country,
    year: i32,
    holiday_file: Option<&Path>,
    weekend: Option<&[Weekday]>,
) -> Result<CountryCalendar, ConfigError> {
    let mut weekend_days = weekend.map(<[Weekday]>::to_vec).unwrap_or_else(|| DEFAULT_WEEKEND.to_vec());
    weekend_days.sort_by_key(|d| d.num_days_from_monday());
    weekend_days.dedup();
    if weekend_days.is_empty() || weekend_days.len() > 3 {
        return Err(ConfigError::Invalid(format!("weekend for {country} must have 1 to 3 days")));
    }
    let holidays = match holiday_file.and_then(|p| resolve_holiday_file(p, country)) {
        Some(path) => read_holiday_file(&path, year)?,
        None => builtin_holidays(country, year)
            .into_iter()
            .map(|(d, l)| (d, l.to_string()))
            .collect(),
    };
    Ok(CountryCalendar { country, year, weekend_days, holidays })
}

pub fn effective_day_type(date: NaiveDate, cal: &CountryCalendar) -> DayType {
    if cal.is_weekend_day(date) || cal.is_holiday(date) {
        DayType::Weekend
    } else {
        DayType::Weekday
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AssemblyError {
    #[error("no daily profile for {}", .0.join(", "))]
    MissingProfiles(Vec<String>),
    #[error("no weather day for {}", .0.join(", "))]
    MissingWeather(Vec<String>),
    #[error("profile {season}/{day_type} has members {found:?}, expected {expected:?}")]
    MemberMismatch { season: Season, day_type: DayType, expected: Vec<String>, found: Vec<String> },
    #[error("calendar is for {calendar}, asked to assemble {year}")]
    YearMismatch { calendar: i32, year: i32 },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearlyRow {
    pub timestamp: NaiveDateTime,
    pub season: Season,
    pub day_type: DayType,
    pub is_holiday: bool,
    pub hour: u8,
    pub total: Decimal,
    pub heating: Decimal,
    pub cooling: Decimal,
    pub members: Vec<Decimal>,
    pub outdoor_temp: Decimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearlyProfile {
    pub country: Country,
    pub family_type: String,
    pub members: Vec<String>,
    pub rows: Vec<YearlyRow>,
}

impl YearlyProfile {
    pub fn count(&self, day_type: DayType) -> usize {
        self.rows.iter().filter(|r| r.day_type == day_type).count()
    }
}

pub fn assemble_year(
    daily: &BTreeMap<(Season, DayType), DailyConsumptionProfile>,
    cal: &CountryCalendar,
    weather: &BTreeMap<Season, HourlyWeatherDay>,
    year: i32,
) -> Result<YearlyProfile, AssemblyError> {
    if cal.year != year {
        return Err(AssemblyError::YearMismatch { calendar: cal.year, year });
    }
    let gaps: Vec<String> = Season::ALL
        .iter()
        .flat_map(|s| DayType::ALL.iter().map(move |d| (*s, *d)))
        .filter(|k| !daily.contains_key(k))
        .map(|(s, d)| format!("{s}/{d}"))
        .collect();
    if !gaps.is_empty() {
        return Err(AssemblyError::MissingProfiles(gaps));
    }
    let missing: Vec<String> = Season::ALL
        .iter()
        .filter(|s| !weather.contains_key(s))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(AssemblyError::MissingWeather(missing));
    }

    let first = &daily[&(Season::Winter, DayType::Weekday)];
    let members: Vec<String> = first.members.iter().map(|m| m.member.clone()).collect();
    for ((season, day_type), p) in daily {
        let found: Vec<String> = p.members.iter().map(|m| m.member.clone()).collect();
        if found != members {
            return Err(AssemblyError::MemberMismatch {
                season: *season,
                day_type: *day_type,
                expected: members,
                found,
            });
        }
    }

    let mut rows = Vec::with_capacity(days_in_year(year) as usize * HOURS);
    for date in cal.dates() {
        let season = cal.country.season_of_month(date.month());
        let day_type = effective_day_type(date, cal);
        let is_holiday = cal.is_holiday(date);
        let p = &daily[&(season, day_type)];
        let temps = weather[&season].get(WeatherParameter::Temperature);
        for h in 0..HOURS {
            rows.push(YearlyRow {
                timestamp: date.and_time(NaiveTime::MIN) + Duration::hours(h as i64),
                season,
                day_type,
                is_holiday,
                hour: h as u8,
                total: p.totals[h],
                heating: p.heating[h].value,
                cooling: p.cooling[h].value,
                members: p.members.iter().map(|m| m.entries[h].value).collect(),
                outdoor_temp: temps[h].value,
            });
        }
    }
    Ok(YearlyProfile { country: cal.country, family_type: first.family_type.clone(), members, rows })
}

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn yearly_csv_header(members: &[String]) -> Vec<String> {
    let mut h: Vec<String> = [
        "timestamp_iso8601",
        "country",
        "family_type",
        "season",
        "day_type",
        "is_holiday",
        "hour_of_day",
        "total_kwh",
        "heating_kwh",
        "cooling_kwh",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(members.iter().map(|m| format!("{m}_kwh")));
    h.push("outdoor_temp_c".into());
    h
}

pub fn write_yearly_csv(path: &Path, y: &YearlyProfile) -> Result<(), AssemblyError> {
    let io = |source| AssemblyError::Io { path: path.to_path_buf(), source };
    let csv_err = |e: csv::Error| AssemblyError::Format { path: path.to_path_buf(), message: e.to_string() };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(yearly_csv_header(&y.members)).map_err(csv_err)?;
    for r in &y.rows {
        let mut rec = vec![
            r.timestamp.format(TIMESTAMP_FORMAT).to_string(),
            y.country.name().to_string(),
            y.family_type.clone(),
            r.season.to_string(),
            r.day_type.to_string(),
            r.is_holiday.to_string(),
            r.hour.to_string(),
            r.total.to_string(),
            r.heating.to_string(),
            r.cooling.to_string(),
        ];
        rec.extend(r.members.iter().map(Decimal::to_string));
        rec.push(r.outdoor_temp.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| AssemblyError::Io { path: path.to_path_buf(), source: e })
}

pub fn read_yearly_csv(path: &Path) -> Result<YearlyProfile, AssemblyError> {
    let fmt = |message: String| AssemblyError::Format { path: path.to_path_buf(), message };
    let mut r = csv::Reader::from_path(path).map_err(|e| fmt(e.to_string()))?;
    let header: Vec<String> = r.headers().map_err(|e| fmt(e.to_string()))?.iter().map(str::to_string).collect();
    if header.len() < 11 || header[..10] != yearly_csv_header(&[])[..10] || header.last().map(String::as_str) != Some("outdoor_temp_c") {
        return Err(fmt("not a yearly profile CSV".into()));
    }
    let members: Vec<String> = header[10..header.len() - 1]
        .iter()
        .map(|c| c.strip_suffix("_kwh").map(str::to_string).ok_or_else(|| fmt(format!("bad member column '{c}'"))))
        .collect::<Result<_, _>>()?;
    let mut country = None;
    let mut family_type = None;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| fmt(e.to_string()))?;
        let bad = |what: &str| fmt(format!("row {}: bad {what}", i + 1));
        let num = |s: &str, what: &str| s.trim().parse::<Decimal>().map_err(|_| bad(what));
        let c: Country = rec[1].parse().map_err(|_| bad("country"))?;
        if *country.get_or_insert(c) != c || family_type.get_or_insert_with(|| rec[2].to_string()) != &rec[2] {
            return Err(fmt(format!("row {}: mixes households", i + 1)));
        }
        rows.push(YearlyRow {
            timestamp: NaiveDateTime::parse_from_str(&rec[0], TIMESTAMP_FORMAT).map_err(|_| bad("timestamp"))?,
            season: rec[3].parse().map_err(|_| bad("season"))?,
            day_type: rec[4].parse().map_err(|_| bad("day_type"))?,
            is_holiday: rec[5].parse().map_err(|_| bad("is_holiday"))?,
            hour: rec[6].parse().map_err(|_| bad("hour_of_day"))?,
            total: num(&rec[7], "total_kwh")?,
            heating: num(&rec[8], "heating_kwh")?,
            cooling: num(&rec[9], "cooling_kwh")?,
            members: (0..members.len())
                .map(|k| num(&rec[10 + k], &header[10 + k]))
                .collect::<Result<_, _>>()?,
            outdoor_temp: num(&rec[header.len() - 1], "outdoor_temp_c")?,
        });
    }
    let country = country.ok_or_else(|| fmt("no rows".into()))?;
    Ok(YearlyProfile { country, family_type: family_type.unwrap_or_default(), members, rows })
}

/// Distinct seasons per month, for continuity checks.
pub fn season_changes(y: &YearlyProfile) -> BTreeSet<(u32, Season)> {
    y.rows.iter().map(|r| (r.timestamp.month(), r.season)).collect()
}
