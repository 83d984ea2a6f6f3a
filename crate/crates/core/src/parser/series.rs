use serde::{Deserialize, Serialize};

use super::lexer::{check_label, tuples};
use super::ranges::parse_number;
use super::{ParseError, ShapeProblem};
use crate::numeric::Decimal;

pub const HOURS: usize = 24;

/// One `(hour, label, value)` tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyEntry {
    pub hour: u8,
    pub label: String,
    pub value: Decimal,
}

impl HourlyEntry {
    pub fn new(hour: u8, label: impl Into<String>, value: Decimal) -> Self {
        HourlyEntry { hour, label: label.into(), value }
    }
}

fn shape(series: &str, problem: ShapeProblem) -> ParseError {
    ParseError::Shape { series: series.to_string(), problem }
}

/// Checks that `hours` is exactly 0..23 in order.
pub(crate) fn check_hours(series: &str, hours: &[u64]) -> Result<(), ParseError> {
    if hours.len() != HOURS {
        return Err(shape(series, ShapeProblem::Count(hours.len())));
    }
    let mut seen = [false; HOURS];
    for &h in hours {
        if h >= HOURS as u64 {
            return Err(shape(series, ShapeProblem::HourOutOfRange(h)));
        }
        if std::mem::replace(&mut seen[h as usize], true) {
            return Err(shape(series, ShapeProblem::DuplicateHour(h as u8)));
        }
    }
    if let Some(pos) = hours.iter().enumerate().position(|(i, &h)| h != i as u64) {
        return Err(shape(series, ShapeProblem::OutOfOrder { position: pos, hour: hours[pos] as u8 }));
    }
    Ok(())
}

/// Parses one section body into exactly 24 entries.
pub(crate) fn parse_series(series: &str, body: &str) -> Result<Vec<HourlyEntry>, ParseError> {
    let mut hours = Vec::new();
    let mut out = Vec::new();
    for t in tuples(body, series)? {
        let [hour, label, value] = t.as_slice() else {
            return Err(ParseError::Syntax {
                context: series.to_string(),
                message: format!("expected (hour, label, value), got {} fields", t.len()),
            });
        };
        let h: u64 = hour.parse().map_err(|_| ParseError::Syntax {
            context: series.to_string(),
            message: format!("hour {hour:?} is not an integer"),
        })?;
        let label = check_label(label, series)?;
        let value = parse_number(value, series)?;
        hours.push(h);
        out.push(HourlyEntry { hour: h.min(255) as u8, label, value });
    }
    check_hours(series, &hours)?;
    Ok(out)
}

pub(crate) fn format_series(name: &str, entries: &[HourlyEntry]) -> String {
    let tuples: Vec<String> = entries
        .iter()
        .map(|e| format!("({}, {}, {})", e.hour, e.label, e.value))
        .collect();
    format!("#{name}#[{}]", tuples.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(n: usize) -> String {
        (0..n).map(|h| format!("({h}, x, 1.5)")).collect::<Vec<_>>().join(",")
    }

    #[test]
    fn exactly_24_hours() {
        assert_eq!(parse_series("T", &body(24)).unwrap().len(), 24);
        let e = parse_series("Temperature", &body(23)).unwrap_err();
        assert!(matches!(e, ParseError::Shape { ref series, problem: ShapeProblem::Count(23) } if series == "Temperature"));
    }

    #[test]
    fn duplicate_and_unordered_hours() {
        let dup = body(24).replace("(5, x", "(4, x");
        assert!(matches!(
            parse_series("T", &dup),
            Err(ParseError::Shape { problem: ShapeProblem::DuplicateHour(4), .. })
        ));
        let swapped = body(24).replace("(5, x", "(X, x").replace("(6, x", "(5, x").replace("(X, x", "(6, x");
        assert!(matches!(
            parse_series("T", &swapped),
            Err(ParseError::Shape { problem: ShapeProblem::OutOfOrder { position: 5, hour: 6 }, .. })
        ));
        let high = body(24).replace("(23, x", "(24, x");
        assert!(matches!(
            parse_series("T", &high),
            Err(ParseError::Shape { problem: ShapeProblem::HourOutOfRange(24), .. })
        ));
    }

    #[test]
    fn non_numeric_value() {
        let bad = body(24).replace("(3, x, 1.5)", "(3, x, warm)");
        assert!(matches!(parse_series("T", &bad), Err(ParseError::Number { .. })));
    }
}
