use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::family::FamilyStructure;
use super::lexer::{items, normalize_label, Item};
use super::series::{format_series, parse_series, HourlyEntry, HOURS};
use super::{Envelope, ParseError};
use crate::domain::{Country, DayType, Season};
use crate::numeric::Decimal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSeries {
    pub member: String,
    pub entries: Vec<HourlyEntry>,
}

/// Stage-4 output for one family, season and day type. `totals` is always
/// recomputed from the member and HVAC series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyConsumptionProfile {
    pub country: Country,
    pub family_type: String,
    pub season: Season,
    pub day_type: DayType,
    pub members: Vec<MemberSeries>,
    pub heating: Vec<HourlyEntry>,
    pub cooling: Vec<HourlyEntry>,
    pub totals: Vec<Decimal>,
}

impl DailyConsumptionProfile {
    pub fn new(
        country: Country,
        family_type: impl Into<String>,
        season: Season,
        day_type: DayType,
        members: Vec<MemberSeries>,
        heating: Vec<HourlyEntry>,
        cooling: Vec<HourlyEntry>,
    ) -> Self {
        let totals = compute_totals(&members, &heating, &cooling);
        DailyConsumptionProfile {
            country,
            family_type: family_type.into(),
            season,
            day_type,
            members,
            heating,
            cooling,
            totals,
        }
    }

    pub fn member(&self, label: &str) -> Option<&MemberSeries> {
        self.members.iter().find(|m| m.member == label)
    }
}

/// Per-hour sum of every member series plus heating and cooling.
pub fn compute_totals(members: &[MemberSeries], heating: &[HourlyEntry], cooling: &[HourlyEntry]) -> Vec<Decimal> {
    (0..HOURS)
        .map(|h| {
            let mut parts: Vec<Decimal> = members.iter().filter_map(|m| m.entries.get(h).map(|e| e.value)).collect();
            parts.extend(heating.get(h).map(|e| e.value));
            parts.extend(cooling.get(h).map(|e| e.value));
            Decimal::sum(parts.iter())
        })
        .collect()
}

fn syntax(context: &str, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { context: context.to_string(), message: message.into() }
}

fn check_non_negative(series: &str, entries: &[HourlyEntry]) -> Result<(), ParseError> {
    match entries.iter().find(|e| e.value.value < 0.0) {
        Some(e) => Err(ParseError::Value {
            series: series.to_string(),
            hour: e.hour,
            message: format!("negative consumption {}", e.value),
        }),
        None => Ok(()),
    }
}

#[derive(PartialEq)]
enum Part {
    Preamble,
    Members,
    Hvac,
}

pub fn parse_consumption(
    env: &Envelope,
    family: &FamilyStructure,
    season: Season,
    day_type: DayType,
) -> Result<DailyConsumptionProfile, ParseError> {
    let mut part = Part::Preamble;
    let mut parsed: BTreeMap<String, (String, Vec<HourlyEntry>)> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut heating = None;
    let mut cooling = None;
    for item in items(env.inner_text())? {
        match item {
            Item::Marker(m) if m.eq_ignore_ascii_case("MEMBERS") && part == Part::Preamble => part = Part::Members,
            Item::Marker(m) if m.eq_ignore_ascii_case("HVAC") && part == Part::Members => part = Part::Hvac,
            Item::Marker(m) => return Err(syntax("consumption", format!("unexpected marker >>>{m}>>>"))),
            Item::Section { name, .. } if part == Part::Preamble => {
                return Err(syntax(&name, "section before >>>MEMBERS>>>"))
            }
            Item::Section { name, body } if part == Part::Members => {
                let key = normalize_label(&name);
                if parsed.contains_key(&key) {
                    return Err(syntax(&name, "duplicate member section"));
                }
                let entries = parse_series(&name, &body)?;
                check_non_negative(&name, &entries)?;
                order.push(key.clone());
                parsed.insert(key, (name, entries));
            }
            Item::Section { name, body } => {
                let slot = match name.to_ascii_lowercase().as_str() {
                    "heating" => &mut heating,
                    "cooling" => &mut cooling,
                    _ => return Err(syntax(&name, "unknown HVAC section")),
                };
                if slot.is_some() {
                    return Err(syntax(&name, "duplicate HVAC section"));
                }
                let entries = parse_series(&name, &body)?;
                check_non_negative(&name, &entries)?;
                *slot = Some(entries);
            }
        }
    }
    if part != Part::Hvac {
        return Err(syntax("consumption", "missing >>>MEMBERS>>> or >>>HVAC>>> marker"));
    }
    let heating = heating.ok_or_else(|| syntax("HVAC", "missing #Heating# section"))?;
    let cooling = cooling.ok_or_else(|| syntax("HVAC", "missing #Cooling# section"))?;

    let missing: Vec<String> = family
        .members
        .iter()
        .filter(|m| !parsed.contains_key(&normalize_label(m)))
        .cloned()
        .collect();
    let extra: Vec<String> = order
        .iter()
        .filter(|k| !family.members.iter().any(|m| &normalize_label(m) == *k))
        .map(|k| parsed[k].0.clone())
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(ParseError::MemberMismatch { missing, extra });
    }
    let members = family
        .members
        .iter()
        .map(|m| MemberSeries {
            member: m.clone(),
            entries: parsed.remove(&normalize_label(m)).map(|(_, e)| e).unwrap_or_default(),
        })
        .collect();
    Ok(DailyConsumptionProfile::new(family.country, family.family_type.clone(), season, day_type, members, heating, cooling))
}

/// Serializes a profile in the Stage-4 grammar.
pub fn format_consumption(p: &DailyConsumptionProfile) -> String {
    let mut out = String::from(">>>MEMBERS>>>");
    for m in &p.members {
        out.push_str(&format_series(&m.member, &m.entries));
    }
    out.push_str(">>>HVAC>>>");
    out.push_str(&format_series("Heating", &p.heating));
    out.push_str(&format_series("Cooling", &p.cooling));
    out
}
