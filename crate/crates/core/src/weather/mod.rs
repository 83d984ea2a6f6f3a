//! Weather inputs: range and hourly validation, PVGIS typical-year data and
//! its seasonal aggregation, and the weather CSV.

mod capitals;
mod csv_io;
mod tmy;
mod validate;

pub use capitals::{Capital, CapitalRegistry};
pub use csv_io::{read_weather_csv, write_weather_csv, WEATHER_CSV_HEADER};
pub use tmy::{
    aggregate_tmy_to_season, cache_path, fetch_tmy, parse_tmy_payload, tmy_url, TmyError, TmyLocation, TmyRecord,
    TmySeries, TMY_HOURS, TMY_LABEL,
};
pub use validate::{
    has_errors, validate_hourly, validate_ranges, Severity, WeatherViolation, WeatherViolationKind, SOLAR_CAP,
    SOLAR_PEAK_HOURS, SUNNY_DIRECT_THRESHOLD, TEMP_PEAK_HOURS,
};
