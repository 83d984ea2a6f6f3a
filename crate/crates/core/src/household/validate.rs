use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::classify::{classify_action, is_school_or_work, ActionClass};
use crate::domain::{DayType, WeatherParameter};
use crate::parser::{DailyConsumptionProfile, HourlyEntry, HourlyWeatherDay, HOURS};
use crate::weather::Severity;

pub const MAX_SLEEP_HOURS: usize = 8;
pub const MAX_REPEAT_HOURS: usize = 3;
/// Heating above this outdoor temperature is implausible, °C.
pub const HEATING_MAX_OUTDOOR: f64 = 28.0;
/// Cooling below this outdoor temperature is implausible, °C.
pub const COOLING_MIN_OUTDOOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BehaviorViolationKind {
    SleepTooLong,
    ActionRepeatTooLong,
    AwayWithConsumption,
    MemberSeriesShape,
    NegativeConsumption,
    WeekendSchoolOrWork,
    SharedActionOverlap,
    HvacWeatherMismatch,
}

impl BehaviorViolationKind {
    pub fn severity(self) -> Severity {
        match self {
            BehaviorViolationKind::SharedActionOverlap | BehaviorViolationKind::HvacWeatherMismatch => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorViolation {
    pub kind: BehaviorViolationKind,
    pub member: String,
    /// Contiguous span, in order; wraps past midnight for sleep runs.
    pub hours: Vec<u8>,
    pub detail: String,
    pub severity: Severity,
}

impl BehaviorViolation {
    fn new(kind: BehaviorViolationKind, member: &str, hours: Vec<u8>, detail: String) -> Self {
        BehaviorViolation { kind, member: member.to_string(), hours, detail, severity: kind.severity() }
    }

    pub fn first_hour(&self) -> Option<u8> {
        self.hours.first().copied()
    }
}

impl fmt::Display for BehaviorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {} hours {:?}: {}", self.kind, self.member, self.hours, self.detail)
    }
}

pub fn has_behavior_errors(v: &[BehaviorViolation]) -> bool {
    v.iter().any(|x| x.severity == Severity::Error)
}

fn well_formed(entries: &[HourlyEntry]) -> bool {
    entries.len() == HOURS && entries.iter().enumerate().all(|(i, e)| e.hour as usize == i)
}

/// Maximal runs of consecutive hours where `pred` holds, as (start, len).
/// With `circular`, a run touching hour 23 continues into hour 0.
fn runs(flags: &[bool], circular: bool) -> Vec<(usize, usize)> {
    let n = flags.len();
    if n == 0 {
        return vec![];
    }
    if flags.iter().all(|&f| f) {
        return vec![(0, n)];
    }
    let mut out = Vec::new();
    let start_at = if circular { flags.iter().position(|&f| !f).unwrap() } else { 0 };
    let mut i = 0;
    while i < n {
        let idx = (start_at + i) % n;
        if flags[idx] {
            let begin = idx;
            let mut len = 0;
            while i < n && flags[(start_at + i) % n] {
                len += 1;
                i += 1;
            }
            out.push((begin, len));
        } else {
            i += 1;
        }
    }
    out
}

fn span(start: usize, len: usize) -> Vec<u8> {
    (0..len).map(|k| ((start + k) % HOURS) as u8).collect()
}

fn same_label(a: &str, b: &str) -> bool {
    a.trim().eq_ignore_ascii_case(b.trim())
}

/// Checks the activity rules the Stage-4 prompt imposes on one profile.
pub fn validate_behavior(profile: &DailyConsumptionProfile, day_type: DayType) -> Vec<BehaviorViolation> {
    use BehaviorViolationKind::*;
    let mut out = Vec::new();
    let hvac = [("Heating", &profile.heating), ("Cooling", &profile.cooling)];
    for (name, entries) in profile.members.iter().map(|m| (m.member.as_str(), &m.entries)).chain(hvac) {
        if !well_formed(entries) {
            out.push(BehaviorViolation::new(MemberSeriesShape, name, vec![], format!("{} entries, hours not 0..23", entries.len())));
            continue;
        }
        for e in entries.iter().filter(|e| e.value.value < 0.0) {
            out.push(BehaviorViolation::new(NegativeConsumption, name, vec![e.hour], format!("{} kWh", e.value)));
        }
    }

    for m in profile.members.iter().filter(|m| well_formed(&m.entries)) {
        let e = &m.entries;
        let classes: Vec<ActionClass> = e.iter().map(|x| classify_action(&x.label)).collect();

        let sleeping: Vec<bool> = classes.iter().map(|&c| c == ActionClass::Sleep).collect();
        for (start, len) in runs(&sleeping, true) {
            if len > MAX_SLEEP_HOURS {
                out.push(BehaviorViolation::new(SleepTooLong, &m.member, span(start, len), format!("{len} consecutive sleeping hours")));
            }
        }

        let mut h = 0;
        while h < HOURS {
            let mut end = h + 1;
            while end < HOURS && same_label(&e[end].label, &e[h].label) {
                end += 1;
            }
            let len = end - h;
            if len > MAX_REPEAT_HOURS && classes[h] != ActionClass::Sleep {
                out.push(BehaviorViolation::new(
                    ActionRepeatTooLong,
                    &m.member,
                    span(h, len),
                    format!("{:?} repeated for {len} hours", e[h].label),
                ));
            }
            h = end;
        }

        for (h, x) in e.iter().enumerate() {
            if classes[h] == ActionClass::Away && x.value.value > 0.0 {
                out.push(BehaviorViolation::new(
                    AwayWithConsumption,
                    &m.member,
                    vec![h as u8],
                    format!("{:?} uses {} kWh while away", x.label, x.value),
                ));
            }
        }

        if day_type == DayType::Weekend {
            let flags: Vec<bool> = e.iter().map(|x| is_school_or_work(&x.label)).collect();
            for (start, len) in runs(&flags, false) {
                out.push(BehaviorViolation::new(
                    WeekendSchoolOrWork,
                    &m.member,
                    span(start, len),
                    format!("{:?} on a weekend", e[start].label),
                ));
            }
        }
    }

    for h in 0..HOURS {
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for m in profile.members.iter().filter(|m| well_formed(&m.entries)) {
            let x = &m.entries[h];
            if classify_action(&x.label) != ActionClass::Sleep && x.value.value > 0.0 {
                groups.entry(x.label.trim().to_lowercase()).or_default().push(x.value.value);
            }
        }
        for (label, vals) in groups.into_iter().filter(|(_, v)| v.len() >= 2) {
            let sum: f64 = vals.iter().sum();
            let max = vals.iter().cloned().fold(0.0, f64::max);
            if sum > 2.0 * max + 1e-9 {
                out.push(BehaviorViolation::new(
                    SharedActionOverlap,
                    "household",
                    vec![h as u8],
                    format!("{} members share {label:?} using {sum:.3} kWh together", vals.len()),
                ));
            }
        }
    }
    out
}

/// Warns about heating on hot hours and cooling on cold hours.
pub fn validate_hvac(profile: &DailyConsumptionProfile, weather: &HourlyWeatherDay) -> Vec<BehaviorViolation> {
    let temps = weather.values(WeatherParameter::Temperature);
    let mut out = Vec::new();
    for (h, &t) in temps.iter().enumerate() {
        if profile.heating.get(h).is_some_and(|e| e.value.value > 0.0) && t > HEATING_MAX_OUTDOOR {
            out.push(BehaviorViolation::new(
                BehaviorViolationKind::HvacWeatherMismatch,
                "Heating",
                vec![h as u8],
                format!("heating at {t} °C"),
            ));
        }
        if profile.cooling.get(h).is_some_and(|e| e.value.value > 0.0) && t < COOLING_MIN_OUTDOOR {
            out.push(BehaviorViolation::new(
                BehaviorViolationKind::HvacWeatherMismatch,
                "Cooling",
                vec![h as u8],
                format!("cooling at {t} °C"),
            ));
        }
    }
    out
}
