use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lexer::{items, tuples, Item};
use super::{Envelope, ParseError};
use crate::domain::{Country, Season, WeatherParameter};
use crate::numeric::Decimal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    pub min: Decimal,
    pub max: Decimal,
}

impl ValueRange {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.min.value && v <= self.max.value
    }
}

/// Stage-2 output: a min/max per weather parameter and season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalWeatherRanges {
    pub country: Country,
    ranges: BTreeMap<WeatherParameter, BTreeMap<Season, ValueRange>>,
}

impl SeasonalWeatherRanges {
    /// Checks completeness and ordering of every bound.
    pub fn new(
        country: Country,
        ranges: BTreeMap<WeatherParameter, BTreeMap<Season, ValueRange>>,
    ) -> Result<Self, ParseError> {
        for p in WeatherParameter::ALL {
            let seasons = ranges.get(&p).ok_or_else(|| ParseError::Syntax {
                context: p.section_name().into(),
                message: "missing section".into(),
            })?;
            for s in Season::ALL {
                let r = seasons.get(&s).ok_or_else(|| ParseError::Syntax {
                    context: p.section_name().into(),
                    message: format!("missing season {s}"),
                })?;
                if r.min.value > r.max.value {
                    return Err(ParseError::Range { parameter: p, season: s, min: r.min, max: r.max });
                }
            }
        }
        Ok(SeasonalWeatherRanges { country, ranges })
    }

    pub fn get(&self, parameter: WeatherParameter, season: Season) -> ValueRange {
        self.ranges[&parameter][&season]
    }
}

pub fn parse_weather_ranges(env: &Envelope, country: Country) -> Result<SeasonalWeatherRanges, ParseError> {
    let mut ranges: BTreeMap<WeatherParameter, BTreeMap<Season, ValueRange>> = BTreeMap::new();
    for item in items(env.inner_text())? {
        let (name, body) = match item {
            Item::Section { name, body } => (name, body),
            Item::Marker(m) => {
                return Err(ParseError::Syntax { context: "ranges".into(), message: format!("unexpected marker {m:?}") })
            }
        };
        let syntax = |message: String| ParseError::Syntax { context: name.clone(), message };
        let param = WeatherParameter::from_section_name(&name)
            .ok_or_else(|| syntax("unknown parameter section".into()))?;
        if ranges.contains_key(&param) {
            return Err(syntax("duplicate section".into()));
        }
        let mut seasons = BTreeMap::new();
        for t in tuples(&body, &name)? {
            let [season, min, max] = t.as_slice() else {
                return Err(syntax(format!("expected (Season,min,max), got {} fields", t.len())));
            };
            let season: Season = season.parse().map_err(|e: crate::domain::UnknownName| syntax(e.to_string()))?;
            let min = parse_number(min, &name)?;
            let max = parse_number(max, &name)?;
            if seasons.insert(season, ValueRange { min, max }).is_some() {
                return Err(syntax(format!("duplicate season {season}")));
            }
        }
        ranges.insert(param, seasons);
    }
    SeasonalWeatherRanges::new(country, ranges)
}

pub(crate) fn parse_number(text: &str, context: &str) -> Result<Decimal, ParseError> {
    text.parse().map_err(|reason| ParseError::Number {
        context: context.to_string(),
        text: text.to_string(),
        reason,
    })
}

/// Serializes ranges in the Stage-2 grammar, one section per line.
pub fn format_weather_ranges(r: &SeasonalWeatherRanges) -> String {
    WeatherParameter::ALL
        .iter()
        .map(|&p| {
            let tuples: Vec<String> = Season::ALL
                .iter()
                .map(|&s| {
                    let v = r.get(p, s);
                    format!("({s},{},{})", v.min, v.max)
                })
                .collect();
            format!("#{}#[{}]", p.section_name(), tuples.join(","))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(temp_winter: &str) -> String {
        format!(
            "#Temperature#[{temp_winter},(Spring,-5,25),(Summer,15,35),(Autumn,0,20)]\
             #Humidity#[(Winter,30,70),(Spring,40,80),(Summer,50,90),(Autumn,40,80)]\
             #SolRad-Diffuse#[(Winter,50,150),(Spring,100,250),(Summer,150,350),(Autumn,100,250)]\
             #SolRad-Direct#[(Winter,100,300),(Spring,200,500),(Summer,300,700),(Autumn,200,500)]\
             #Wind-Speed#[(Winter,0,15),(Spring,2,18),(Summer,2,15),(Autumn,2,18)]"
        )
    }

    #[test]
    fn inverted_bounds_are_range_errors() {
        let e = parse_weather_ranges(&Envelope::from_inner(sample("(Winter,10,-10)")), Country::Usa).unwrap_err();
        assert!(matches!(
            e,
            ParseError::Range { parameter: WeatherParameter::Temperature, season: Season::Winter, .. }
        ));
    }

    #[test]
    fn missing_season_is_a_parse_error() {
        let text = sample("(Winter,-20,10)").replace("(Autumn,2,18)]", "]");
        let e = parse_weather_ranges(&Envelope::from_inner(text), Country::Usa).unwrap_err();
        assert!(matches!(e, ParseError::Syntax { ref message, .. } if message.contains("Autumn")), "{e}");
    }

    #[test]
    fn sections_in_any_order() {
        let text = sample("(Winter,-20,10)");
        let mut lines: Vec<String> = text.split("]#").map(str::to_string).collect();
        lines.reverse();
        let shuffled = lines
            .iter()
            .map(|l| format!("#{}]", l.trim_start_matches('#').trim_end_matches(']')))
            .collect::<String>();
        let a = parse_weather_ranges(&Envelope::from_inner(text), Country::Usa).unwrap();
        let b = parse_weather_ranges(&Envelope::from_inner(shuffled), Country::Usa).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_numeric_bound() {
        let e = parse_weather_ranges(&Envelope::from_inner(sample("(Winter,cold,10)")), Country::Usa).unwrap_err();
        assert!(matches!(e, ParseError::Number { .. }));
    }
}
