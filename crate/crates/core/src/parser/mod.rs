//! Parsers for the four stage output grammars and their inverse
//! formatters.
//!
//! Every parser takes an [`Envelope`], so text outside the message
//! delimiters never reaches a grammar.

mod consumption;
mod envelope;
mod family;
mod hourly;
mod lexer;
mod ranges;
mod series;

use std::fmt;

pub use consumption::{compute_totals, format_consumption, parse_consumption, DailyConsumptionProfile, MemberSeries};
pub use envelope::{extract_envelope, wrap_envelope, Envelope, EnvelopeErrorKind, MESSAGE_END, MESSAGE_START};
pub use family::{format_family_structures, parse_family_structures, sanitize_label, FamilyStructure};
pub use hourly::{format_hourly_weather, parse_hourly_weather, HourlyWeatherDay};
pub use lexer::normalize_label;
pub use ranges::{format_weather_ranges, parse_weather_ranges, SeasonalWeatherRanges, ValueRange};
pub use series::{HourlyEntry, HOURS};

use crate::domain::{Season, WeatherParameter};
use crate::numeric::{Decimal, DecimalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeProblem {
    Count(usize),
    DuplicateHour(u8),
    OutOfOrder { position: usize, hour: u8 },
    HourOutOfRange(u64),
}

impl fmt::Display for ShapeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeProblem::Count(n) => write!(f, "{n} entries instead of 24"),
            ShapeProblem::DuplicateHour(h) => write!(f, "hour {h} appears twice"),
            ShapeProblem::OutOfOrder { position, hour } => write!(f, "hour {hour} at position {position}"),
            ShapeProblem::HourOutOfRange(h) => write!(f, "hour {h} is outside 0..23"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("envelope: {0}")]
    Envelope(EnvelopeErrorKind),
    #[error("{context}: {message}")]
    Syntax { context: String, message: String },
    #[error("{context}: {reason}")]
    Number { context: String, text: String, reason: DecimalError },
    #[error("{0}")]
    Content(String),
    #[error("{parameter} {season}: min {min} is above max {max}")]
    Range { parameter: WeatherParameter, season: Season, min: Decimal, max: Decimal },
    #[error("{series}: {problem}")]
    Shape { series: String, problem: ShapeProblem },
    #[error("member mismatch: missing {missing:?}, unexpected {extra:?}")]
    MemberMismatch { missing: Vec<String>, extra: Vec<String> },
    #[error("{series} hour {hour}: {message}")]
    Value { series: String, hour: u8, message: String },
}
