//! Decimal readings that remember how many fractional digits they were
//! written with, so values round-trip through model text and CSV unchanged.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Maximum fractional digits accepted when parsing model output.
pub const MAX_PLACES: u8 = 6;

/// A numeric value plus its display precision.
///
/// `value` is the full-precision number used in arithmetic; `places` only
/// governs formatting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decimal {
    pub value: f64,
    pub places: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecimalError {
    #[error("empty number")]
    Empty,
    #[error("'{0}' is not a decimal number")]
    Malformed(String),
    #[error("'{0}' has more than {MAX_PLACES} fractional digits")]
    TooPrecise(String),
}

impl Decimal {
    pub const ZERO: Decimal = Decimal { value: 0.0, places: 0 };

    pub fn new(value: f64, places: u8) -> Self {
        Decimal { value, places }
    }

    pub fn integer(value: i64) -> Self {
        Decimal { value: value as f64, places: 0 }
    }

    /// Sum that keeps the widest precision of its terms, so 0.02 + 0.3
    /// prints as `0.32`.
    pub fn sum<'a, I: IntoIterator<Item = &'a Decimal>>(terms: I) -> Decimal {
        let mut value = 0.0;
        let mut places = 0;
        for t in terms {
            value += t.value;
            places = places.max(t.places);
        }
        // every term has at most `places` digits, so the exact sum does too;
        // snapping removes binary accumulation noise
        let scale = 10f64.powi(places as i32);
        Decimal { value: (value * scale).round() / scale, places }
    }

    /// Equality of the printed representation.
    pub fn same_text(&self, other: &Decimal) -> bool {
        self.to_string() == other.to_string()
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{:.*}", self.places as usize, self.value);
        // never print "-0" or "-0.00"
        match s.strip_prefix('-') {
            Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => f.write_str(rest),
            _ => f.write_str(&s),
        }
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    /// Strict grammar: `-?digits(.digits)?`.
    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let s = raw.trim();
        if s.is_empty() {
            return Err(DecimalError::Empty);
        }
        let body = s.strip_prefix('-').unwrap_or(s);
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let digits_ok = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
        if !digits_ok(int_part) || frac_part.is_some_and(|f| !digits_ok(f)) {
            return Err(DecimalError::Malformed(s.to_string()));
        }
        let places = frac_part.map_or(0, str::len);
        if places > MAX_PLACES as usize {
            return Err(DecimalError::TooPrecise(s.to_string()));
        }
        let value: f64 = s.parse().map_err(|_| DecimalError::Malformed(s.to_string()))?;
        Ok(Decimal { value, places: places as u8 })
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Number(v) => Ok(Decimal { value: v, places: 6 }),
        }
    }
}
