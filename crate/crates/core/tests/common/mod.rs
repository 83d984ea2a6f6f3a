//! Scripted chat backend that answers every stage with well-formed,
//! validator-clean output derived from the request text.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};
use synthgrid::domain::{Country, DayType, Season, StageId};
use synthgrid::gateway::{ChatBackend, ChatExchange, ChatMessage, ChatParams, GatewayError, Role};
use synthgrid::numeric::Decimal;
use synthgrid::parser::{format_consumption, wrap_envelope, DailyConsumptionProfile, HourlyEntry, MemberSeries};
use synthgrid::prompts::stage_of_messages;

pub const FAMILY_TYPES: [(&str, &[&str]); 5] = [
    ("Nuclear-Family", &["Father", "Mother", "Son"]),
    ("Single-Parent", &["Mother", "Daughter"]),
    ("Couple", &["Husband", "Wife"]),
    ("Extended-Family", &["Grandmother", "Father", "Mother", "Son"]),
    ("Single-Person", &["Adult"]),
];

#[derive(Default)]
pub struct Scripted {
    /// Attempts below this ordinal get an answer without an envelope.
    pub reject_below: BTreeMap<StageId, u32>,
    pub calls: AtomicUsize,
}

impl Scripted {
    pub fn rejecting(stage: StageId, attempts: u32) -> Self {
        Scripted { reject_below: BTreeMap::from([(stage, attempts)]), ..Default::default() }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

fn between<'a>(text: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let i = text.find(start)? + start.len();
    let j = text[i..].find(end)? + i;
    Some(text[i..j].trim())
}

fn country_in(text: &str) -> Country {
    Country::ALL
        .into_iter()
        .filter(|c| text.contains(c.name()))
        .max_by_key(|c| c.name().len())
        .expect("prompt names a country")
}

/// Shape in [0, 1] with its minimum at 03:00 and maximum at 15:00.
fn diurnal(h: usize) -> f64 {
    0.5 - 0.5 * (2.0 * PI * (h as f64 - 3.0) / 24.0).cos()
}

pub fn temp_range(s: Season) -> (i32, i32) {
    match s {
        Season::Winter => (-2, 8),
        Season::Spring => (8, 18),
        Season::Summer => (20, 32),
        Season::Autumn => (6, 16),
    }
}

pub fn families_response(c: Country) -> String {
    let fams: Vec<String> = FAMILY_TYPES
        .iter()
        .map(|(t, m)| {
            let members: Vec<String> = m.iter().map(|x| format!("\"{x}\"")).collect();
            format!("{{\"Family Type\": \"{t}\", \"Members\": [{}]}}", members.join(", "))
        })
        .collect();
    wrap_envelope(&format!("[{{\"Country\": \"{}\", \"Families\": [{}]}}]", c.name(), fams.join(", ")))
}

pub fn ranges_response() -> String {
    let list = |f: &dyn Fn(Season) -> (i32, i32)| {
        Season::ALL.iter().map(|&s| { let (a, b) = f(s); format!("({s},{a},{b})") }).collect::<Vec<_>>().join(",")
    };
    wrap_envelope(&format!(
        "#Temperature#[{}]#Humidity#[{}]#SolRad-Diffuse#[{}]#SolRad-Direct#[{}]#Wind-Speed#[{}]",
        list(&temp_range),
        list(&|_| (40, 80)),
        list(&|_| (0, 200)),
        list(&|_| (0, 600)),
        list(&|_| (1, 6)),
    ))
}

pub fn direct_at(h: usize) -> f64 {
    if (7..20).contains(&h) {
        (600.0 * (PI * (h as f64 - 6.0) / 14.0).sin()).round()
    } else {
        0.0
    }
}

pub fn weather_response(s: Season) -> String {
    let (lo, hi) = temp_range(s);
    let series = |name: &str, label: &str, f: &dyn Fn(usize) -> String| {
        let t: Vec<String> = (0..24).map(|h| format!("({h},{label},{})", f(h))).collect();
        format!("#{name}#[{}]", t.join(", "))
    };
    let text = [
        series("Temperature", "Mild", &|h| format!("{:.1}", lo as f64 + (hi - lo) as f64 * diurnal(h))),
        series("Humidity", "Moist", &|h| format!("{:.0}", 80.0 - 40.0 * diurnal(h))),
        series("SolRad-Diffuse", "Scattered", &|h| format!("{:.0}", (0.3 * direct_at(h)).round())),
        series("SolRad-Direct", "Beam", &|h| format!("{:.0}", direct_at(h))),
        series("Wind-Speed", "Breeze", &|h| format!("{:.1}", 3.0 + 2.0 * diurnal(h))),
    ]
    .join("\n");
    wrap_envelope(&text)
}

fn member_day(day_type: DayType, k: usize) -> Vec<HourlyEntry> {
    let bump = 0.01 * k as f64;
    let plan: Vec<(&str, f64)> = (0..24)
        .map(|h| match (h, day_type) {
            (0..=5 | 23, _) => ("Sleeping", 0.05),
            (6, _) => ("Breakfast", 0.2),
            (7, _) => ("Getting-ready", 0.1),
            (8 | 16, DayType::Weekday) => ("Commuting", 0.0),
            (9..=11 | 13..=15, DayType::Weekday) => ("At-work", 0.0),
            (12, _) => ("Lunch-break", 0.2),
            (8, DayType::Weekend) => ("Cleaning", 0.2),
            (9..=11, DayType::Weekend) => ("Gardening", 0.1),
            (13..=15, DayType::Weekend) => ("Visiting-friends", 0.0),
            (16, DayType::Weekend) => ("Laundry", 0.3),
            (17, _) => ("Cooking", 0.3),
            (18, _) => ("Dinner", 0.2),
            (19, _) => ("Watching-TV", 0.15),
            (20, _) => ("Reading", 0.05),
            (21, _) => ("Relaxing", 0.1),
            _ => ("Preparing-for-bed", 0.05),
        })
        .collect();
    plan.into_iter()
        .enumerate()
        .map(|(h, (l, v))| HourlyEntry::new(h as u8, l, Decimal::new(if v > 0.0 { v + bump } else { 0.0 }, 2)))
        .collect()
}

pub fn profile(c: Country, family_type: &str, members: &[String], season: Season, day_type: DayType) -> DailyConsumptionProfile {
    let heats = matches!(season, Season::Winter | Season::Autumn);
    let hvac = |on: bool, hours: &dyn Fn(usize) -> bool, label: &str, kwh: f64| -> Vec<HourlyEntry> {
        (0..24)
            .map(|h| {
                if on && hours(h) {
                    HourlyEntry::new(h as u8, label, Decimal::new(kwh, 1))
                } else {
                    HourlyEntry::new(h as u8, "Off", Decimal::new(0.0, 1))
                }
            })
            .collect()
    };
    DailyConsumptionProfile::new(
        c,
        family_type,
        season,
        day_type,
        members
            .iter()
            .enumerate()
            .map(|(k, m)| MemberSeries { member: m.clone(), entries: member_day(day_type, k) })
            .collect(),
        hvac(heats, &|h| (6..=8).contains(&h) || (17..=22).contains(&h), "Heating-on", 0.5),
        hvac(season == Season::Summer, &|h| (13..=17).contains(&h), "Cooling-on", 0.8),
    )
}

pub fn energy_response(user: &str) -> String {
    let c = country_in(user);
    let day_type: DayType = between(user, "usage pattern in the ", " considering").unwrap().parse().unwrap();
    let season: Season = between(user, "the season is ", ".").unwrap().parse().unwrap();
    let family_type = between(user, "family type is ", ", which").unwrap();
    let members: Vec<String> = between(user, "following members: ", " total of")
        .unwrap()
        .split(", ")
        .map(str::to_string)
        .collect();
    wrap_envelope(&format_consumption(&profile(c, family_type, &members, season, day_type)))
}

/// Deterministic usage numbers, so replayed accounting is stable.
fn pseudo(text: &str, modulus: u64) -> u64 {
    let d = Sha256::digest(text.as_bytes());
    u64::from_le_bytes(d[..8].try_into().unwrap()) % modulus
}

impl ChatBackend for Scripted {
    fn send(&self, messages: &[ChatMessage], params: &ChatParams) -> Result<ChatExchange, GatewayError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let stage = stage_of_messages(messages).ok_or_else(|| GatewayError::InvalidRequest("unknown stage".into()))?;
        let user = &messages.iter().rev().find(|m| m.role == Role::User).unwrap().content;
        let text = if params.attempt < self.reject_below.get(&stage).copied().unwrap_or(0) {
            "I cannot help with that.".to_string()
        } else {
            match stage {
                StageId::FamilyTypes => families_response(country_in(user)),
                StageId::WeatherRanges => ranges_response(),
                StageId::WeatherData => {
                    weather_response(between(user, "during the ", " season").unwrap().parse().unwrap())
                }
                StageId::EnergyPatterns => energy_response(user),
            }
        };
        let prompt_chars: usize = messages.iter().map(|m| m.content.len()).sum();
        Ok(ChatExchange {
            request_messages: messages.to_vec(),
            prompt_tokens: (prompt_chars / 4) as u64,
            completion_tokens: (text.len() / 4) as u64,
            latency: Duration::from_millis(500 + pseudo(user, 1500)),
            response_text: text,
            model_id: params.model_id.clone(),
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            attempt: params.attempt,
            timestamp: DateTime::<Utc>::from_timestamp(1_735_689_600, 0).unwrap(),
        })
    }
}

/// A PVGIS-shaped TMY payload with 8760 UTC rows; `row(i)` gives
/// (temperature, humidity, direct normal, diffuse horizontal, wind).
pub fn pvgis_payload(row: impl Fn(usize) -> (f64, f64, f64, f64, f64)) -> String {
    let start = chrono::NaiveDate::from_ymd_opt(2010, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let rows: Vec<serde_json::Value> = (0..8760)
        .map(|i| {
            let t = start + chrono::Duration::hours(i as i64);
            let (t2m, rh, gb, gd, ws) = row(i);
            serde_json::json!({
                "time(UTC)": t.format("%Y%m%d:%H%M").to_string(),
                "T2m": t2m, "RH": rh, "G(h)": 0.0, "Gb(n)": gb, "Gd(h)": gd,
                "IR(h)": 300.0, "WS10m": ws, "WD10m": 90.0, "SP": 101000.0
            })
        })
        .collect();
    serde_json::json!({ "inputs": {}, "outputs": { "months_selected": [], "tmy_hourly": rows } }).to_string()
}
