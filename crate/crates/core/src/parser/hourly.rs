use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lexer::{items, Item};
use super::series::{check_hours, format_series, parse_series, HourlyEntry};
use super::{Envelope, ParseError};
use crate::domain::{Country, Season, WeatherParameter};

/// A labeled 24-hour profile of the five weather parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyWeatherDay {
    pub country: Country,
    pub season: Season,
    pub series: BTreeMap<WeatherParameter, Vec<HourlyEntry>>,
}

impl HourlyWeatherDay {
    /// Builds a day, checking that all five parameters cover hours 0..23.
    pub fn new(
        country: Country,
        season: Season,
        series: BTreeMap<WeatherParameter, Vec<HourlyEntry>>,
    ) -> Result<Self, ParseError> {
        for p in WeatherParameter::ALL {
            let entries = series.get(&p).ok_or_else(|| ParseError::Syntax {
                context: p.section_name().into(),
                message: "missing section".into(),
            })?;
            let hours: Vec<u64> = entries.iter().map(|e| e.hour as u64).collect();
            check_hours(p.section_name(), &hours)?;
        }
        Ok(HourlyWeatherDay { country, season, series })
    }

    pub fn get(&self, p: WeatherParameter) -> &[HourlyEntry] {
        self.series.get(&p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn values(&self, p: WeatherParameter) -> Vec<f64> {
        self.get(p).iter().map(|e| e.value.value).collect()
    }
}

pub fn parse_hourly_weather(env: &Envelope, country: Country, season: Season) -> Result<HourlyWeatherDay, ParseError> {
    let mut series = BTreeMap::new();
    for item in items(env.inner_text())? {
        let (name, body) = match item {
            Item::Section { name, body } => (name, body),
            Item::Marker(m) => {
                return Err(ParseError::Syntax { context: "weather".into(), message: format!("unexpected marker {m:?}") })
            }
        };
        let param = WeatherParameter::from_section_name(&name).ok_or_else(|| ParseError::Syntax {
            context: name.clone(),
            message: "unknown parameter section".into(),
        })?;
        if series.contains_key(&param) {
            return Err(ParseError::Syntax { context: name, message: "duplicate section".into() });
        }
        series.insert(param, parse_series(param.section_name(), &body)?);
    }
    HourlyWeatherDay::new(country, season, series)
}

/// Serializes a day in the Stage-3 grammar, one section per line.
pub fn format_hourly_weather(day: &HourlyWeatherDay) -> String {
    WeatherParameter::ALL
        .iter()
        .map(|&p| format_series(p.section_name(), day.get(p)))
        .collect::<Vec<_>>()
        .join("\n")
}
