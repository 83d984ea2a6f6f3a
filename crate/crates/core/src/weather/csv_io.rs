use std::collections::BTreeMap;
use std::path::Path;

use crate::domain::{Country, Season, WeatherParameter};
use crate::numeric::Decimal;
use crate::parser::{HourlyEntry, HourlyWeatherDay, HOURS};

pub const WEATHER_CSV_HEADER: [&str; 13] = [
    "country",
    "season",
    "hour",
    "temp_label",
    "temp_c",
    "humidity_label",
    "humidity_pct",
    "diffuse_label",
    "diffuse_wm2",
    "direct_label",
    "direct_wm2",
    "wind_label",
    "wind_ms",
];

/// Column order of the parameters in the weather CSV.
const COLUMN_ORDER: [WeatherParameter; 5] = [
    WeatherParameter::Temperature,
    WeatherParameter::Humidity,
    WeatherParameter::SolRadDiffuse,
    WeatherParameter::SolRadDirect,
    WeatherParameter::WindSpeed,
];

/// One row per country, season and hour.
pub fn write_weather_csv(path: &Path, days: &[&HourlyWeatherDay]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(WEATHER_CSV_HEADER)?;
    for day in days {
        for h in 0..HOURS {
            let mut row = vec![day.country.name().to_string(), day.season.name().to_string(), h.to_string()];
            for p in COLUMN_ORDER {
                let e = &day.get(p)[h];
                row.push(e.label.clone());
                row.push(e.value.to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn bad(msg: String) -> csv::Error {
    csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, msg))
}

pub fn read_weather_csv(path: &Path) -> Result<Vec<HourlyWeatherDay>, csv::Error> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().collect::<Vec<_>>() != WEATHER_CSV_HEADER {
        return Err(bad(format!("{}: unexpected header", path.display())));
    }
    let mut acc: BTreeMap<(Country, Season), BTreeMap<WeatherParameter, Vec<HourlyEntry>>> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let country: Country = rec[0].parse().map_err(|e: crate::domain::UnknownName| bad(e.to_string()))?;
        let season: Season = rec[1].parse().map_err(|e: crate::domain::UnknownName| bad(e.to_string()))?;
        let hour: u8 = rec[2].parse().map_err(|_| bad(format!("bad hour {:?}", &rec[2])))?;
        let day = acc.entry((country, season)).or_default();
        for (i, p) in COLUMN_ORDER.iter().enumerate() {
            let label = rec[3 + 2 * i].to_string();
            let value: Decimal = rec[4 + 2 * i].parse().map_err(|e: crate::numeric::DecimalError| bad(e.to_string()))?;
            day.entry(*p).or_default().push(HourlyEntry { hour, label, value });
        }
    }
    acc.into_iter()
        .map(|((c, s), series)| HourlyWeatherDay::new(c, s, series).map_err(|e| bad(e.to_string())))
        .collect()
}
