use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{Season, WeatherParameter};
use crate::parser::{HourlyWeatherDay, SeasonalWeatherRanges};

/// Upper bound on diffuse + direct irradiance, W/m².
pub const SOLAR_CAP: f64 = 1000.0;
/// Direct irradiance above which an hour counts as sunny, W/m².
pub const SUNNY_DIRECT_THRESHOLD: f64 = 50.0;
pub const TEMP_PEAK_HOURS: [usize; 3] = [14, 15, 16];
pub const SOLAR_PEAK_HOURS: [usize; 4] = [12, 13, 14, 15];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeatherViolationKind {
    SolarSumExceedsCap,
    DiffuseNotBelowDirect,
    TempPeakOutsideWindow,
    SolarPeakOutsideWindow,
    RangeExceeded,
    NegativeValue,
}

impl WeatherViolationKind {
    pub fn severity(self) -> Severity {
        match self {
            WeatherViolationKind::TempPeakOutsideWindow | WeatherViolationKind::SolarPeakOutsideWindow => {
                Severity::Warning
            }
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherViolation {
    pub kind: WeatherViolationKind,
    pub hour: Option<u8>,
    pub season: Option<Season>,
    pub parameter: Option<WeatherParameter>,
    pub detail: String,
    pub severity: Severity,
}

impl WeatherViolation {
    fn new(kind: WeatherViolationKind, detail: String) -> Self {
        WeatherViolation { kind, hour: None, season: None, parameter: None, detail, severity: kind.severity() }
    }

    fn at(mut self, hour: usize) -> Self {
        self.hour = Some(hour as u8);
        self
    }

    fn season(mut self, s: Season) -> Self {
        self.season = Some(s);
        self
    }

    fn param(mut self, p: WeatherParameter) -> Self {
        self.parameter = Some(p);
        self
    }
}

impl fmt::Display for WeatherViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(h) = self.hour {
            write!(f, "@{h}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

pub fn has_errors(violations: &[WeatherViolation]) -> bool {
    violations.iter().any(|v| v.severity == Severity::Error)
}

fn must_be_non_negative(p: WeatherParameter) -> bool {
    p != WeatherParameter::Temperature
}

pub fn validate_ranges(ranges: &SeasonalWeatherRanges) -> Vec<WeatherViolation> {
    use WeatherViolationKind::*;
    let mut out = Vec::new();
    for s in Season::ALL {
        let diffuse = ranges.get(WeatherParameter::SolRadDiffuse, s).max.value;
        let direct = ranges.get(WeatherParameter::SolRadDirect, s).max.value;
        if diffuse + direct > SOLAR_CAP {
            out.push(
                WeatherViolation::new(
                    SolarSumExceedsCap,
                    format!("{s}: diffuse max {diffuse} + direct max {direct} > {SOLAR_CAP}"),
                )
                .season(s),
            );
        }
        for p in WeatherParameter::ALL {
            let r = ranges.get(p, s);
            if must_be_non_negative(p) && r.min.value < 0.0 {
                out.push(WeatherViolation::new(NegativeValue, format!("{p} {s} min {}", r.min)).season(s).param(p));
            }
            if p == WeatherParameter::Humidity && r.max.value > 100.0 {
                out.push(WeatherViolation::new(RangeExceeded, format!("humidity {s} max {} > 100", r.max)).season(s).param(p));
            }
        }
    }
    out
}

/// First hour holding the maximum value.
fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Checks one day. With `ranges`, every value must sit inside the season's
/// bounds; irradiance is checked against the upper bound only, since night
/// hours are zero whatever the daytime minimum.
pub fn validate_hourly(day: &HourlyWeatherDay, ranges: Option<&SeasonalWeatherRanges>) -> Vec<WeatherViolation> {
    use WeatherViolationKind::*;
    let mut out = Vec::new();
    let diffuse = day.values(WeatherParameter::SolRadDiffuse);
    let direct = day.values(WeatherParameter::SolRadDirect);
    let temp = day.values(WeatherParameter::Temperature);
    let season = day.season;

    for h in 0..diffuse.len().min(direct.len()) {
        let (df, dr) = (diffuse[h], direct[h]);
        if df + dr > SOLAR_CAP {
            out.push(WeatherViolation::new(SolarSumExceedsCap, format!("diffuse {df} + direct {dr} > {SOLAR_CAP}")).at(h));
        }
        if dr > SUNNY_DIRECT_THRESHOLD && df >= dr {
            out.push(WeatherViolation::new(DiffuseNotBelowDirect, format!("diffuse {df} >= direct {dr}")).at(h));
        }
    }
    for p in WeatherParameter::ALL {
        for (h, &v) in day.values(p).iter().enumerate() {
            if must_be_non_negative(p) && v < 0.0 {
                out.push(WeatherViolation::new(NegativeValue, format!("{p} = {v}")).at(h).param(p));
                continue;
            }
            if p == WeatherParameter::Humidity && v > 100.0 {
                out.push(WeatherViolation::new(RangeExceeded, format!("humidity {v} > 100")).at(h).param(p));
                continue;
            }
            if let Some(r) = ranges.map(|r| r.get(p, season)) {
                let below = !p.is_solar() && v < r.min.value;
                if below || v > r.max.value {
                    out.push(
                        WeatherViolation::new(RangeExceeded, format!("{p} {v} outside [{}, {}]", r.min, r.max))
                            .at(h)
                            .param(p),
                    );
                }
            }
        }
    }
    if let Some(peak) = argmax(&temp) {
        if !TEMP_PEAK_HOURS.contains(&peak) {
            out.push(
                WeatherViolation::new(TempPeakOutsideWindow, format!("temperature peaks at hour {peak}, not 14-16"))
                    .at(peak)
                    .param(WeatherParameter::Temperature),
            );
        }
    }
    if let Some(peak) = argmax(&direct) {
        if direct[peak] > 0.0 && !SOLAR_PEAK_HOURS.contains(&peak) {
            out.push(
                WeatherViolation::new(SolarPeakOutsideWindow, format!("direct radiation peaks at hour {peak}, not 12-15"))
                    .at(peak)
                    .param(WeatherParameter::SolRadDirect),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Country;
    use crate::numeric::Decimal;
    use crate::parser::{parse_weather_ranges, Envelope, HourlyEntry};
    use std::collections::BTreeMap;

    fn table3(country_row: &str) -> SeasonalWeatherRanges {
        parse_weather_ranges(&Envelope::from_inner(country_row), Country::Uae).unwrap()
    }

    fn uae() -> SeasonalWeatherRanges {
        // published seasonal ranges for the United Arab Emirates
        table3(
            "#Temperature#[(Winter,15,30),(Spring,22,38),(Summer,28,45),(Autumn,25,40)]\
             #Humidity#[(Winter,40,85),(Spring,35,75),(Summer,55,95),(Autumn,45,90)]\
             #SolRad-Diffuse#[(Winter,50,120),(Spring,60,140),(Summer,70,160),(Autumn,60,150)]\
             #SolRad-Direct#[(Winter,180,320),(Spring,220,380),(Summer,280,420),(Autumn,200,360)]\
             #Wind-Speed#[(Winter,1.5,4.5),(Spring,2.0,5.5),(Summer,2.5,6.5),(Autumn,2.0,5.0)]",
        )
    }

    pub(crate) fn clean_day() -> HourlyWeatherDay {
        let temp = |h: usize| 10.0 + 8.0 * (-(((h as f64) - 15.0) / 5.0).powi(2)).exp();
        let direct = |h: usize| if (7..=18).contains(&h) { 400.0 - 30.0 * ((h as f64) - 13.0).abs() * 2.0 } else { 0.0 };
        let mut series = BTreeMap::new();
        let mk = |f: &dyn Fn(usize) -> f64| (0..24).map(|h| HourlyEntry::new(h as u8, "x", Decimal::new(f(h), 1))).collect::<Vec<_>>();
        series.insert(WeatherParameter::Temperature, mk(&temp));
        series.insert(WeatherParameter::Humidity, mk(&|h| 60.0 - h as f64));
        series.insert(WeatherParameter::SolRadDirect, mk(&direct));
        series.insert(WeatherParameter::SolRadDiffuse, mk(&|h| direct(h) * 0.3));
        series.insert(WeatherParameter::WindSpeed, mk(&|_| 3.0));
        HourlyWeatherDay::new(Country::Usa, Season::Summer, series).unwrap()
    }

    fn set(day: &mut HourlyWeatherDay, p: WeatherParameter, h: usize, v: f64) {
        day.series.get_mut(&p).unwrap()[h].value = Decimal::new(v, 1);
    }

    fn kinds(v: &[WeatherViolation]) -> Vec<(WeatherViolationKind, Option<u8>)> {
        v.iter().map(|x| (x.kind, x.hour)).collect()
    }

    #[test]
    fn uae_summer_row_is_accepted() {
        assert!(validate_ranges(&uae()).is_empty());
    }

    #[test]
    fn range_cap_and_negatives() {
        let text = "#Temperature#[(Winter,15,25),(Spring,20,35),(Summer,30,45),(Autumn,25,35)]\
             #Humidity#[(Winter,-5,70),(Spring,30,60),(Summer,20,50),(Autumn,30,60)]\
             #SolRad-Diffuse#[(Winter,40,100),(Spring,60,140),(Summer,70,600),(Autumn,50,120)]\
             #SolRad-Direct#[(Winter,200,350),(Spring,250,400),(Summer,280,700),(Autumn,220,380)]\
             #Wind-Speed#[(Winter,2,8),(Spring,3,10),(Summer,2,8),(Autumn,3,9)]";
        let v = validate_ranges(&table3(text));
        let k: Vec<_> = v.iter().map(|x| (x.kind, x.season)).collect();
        assert_eq!(
            k,
            vec![
                (WeatherViolationKind::NegativeValue, Some(Season::Winter)),
                (WeatherViolationKind::SolarSumExceedsCap, Some(Season::Summer)),
            ]
        );
    }

    #[test]
    fn compliant_day_is_clean() {
        assert_eq!(validate_hourly(&clean_day(), None), vec![]);
    }

    #[test]
    fn diffuse_above_direct_at_noon() {
        let mut d = clean_day();
        set(&mut d, WeatherParameter::SolRadDiffuse, 12, 150.0);
        set(&mut d, WeatherParameter::SolRadDirect, 12, 100.0);
        assert_eq!(kinds(&validate_hourly(&d, None)), vec![(WeatherViolationKind::DiffuseNotBelowDirect, Some(12))]);
    }

    #[test]
    fn early_temperature_peak_is_a_warning() {
        let mut d = clean_day();
        set(&mut d, WeatherParameter::Temperature, 10, 30.0);
        let v = validate_hourly(&d, None);
        assert_eq!(kinds(&v), vec![(WeatherViolationKind::TempPeakOutsideWindow, Some(10))]);
        assert!(!has_errors(&v));
    }

    #[test]
    fn ranges_bound_values_but_not_night_irradiance() {
        let mut d = clean_day();
        let r = uae();
        let v = validate_hourly(&d, Some(&r));
        // 10-18 °C day against the 28-45 °C summer band
        assert!(v.iter().all(|x| x.parameter == Some(WeatherParameter::Temperature) || x.parameter == Some(WeatherParameter::Humidity)));
        set(&mut d, WeatherParameter::SolRadDirect, 13, 500.0);
        let v = validate_hourly(&d, Some(&r));
        assert!(v.iter().any(|x| x.kind == WeatherViolationKind::RangeExceeded
            && x.parameter == Some(WeatherParameter::SolRadDirect)
            && x.hour == Some(13)));
        assert!(!v.iter().any(|x| x.parameter == Some(WeatherParameter::SolRadDiffuse)));
    }
}
