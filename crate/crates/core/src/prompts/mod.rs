//! Prompt templates for the four stages and the conversation builders that
//! fill them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::domain::{Country, DayType, Season, StageId, WeatherParameter};
use crate::gateway::{ChatMessage, Role};
use crate::parser::{FamilyStructure, HourlyWeatherDay, SeasonalWeatherRanges, HOURS};

pub type Bindings = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("no binding for placeholder ${0}$")]
    MissingPlaceholder(String),
    #[error("conversation history: {0}")]
    History(String),
    #[error("{series}: expected 24 hourly values, got {count}")]
    Shape { series: String, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub stage: StageId,
    pub role: Role,
    pub file_name: &'static str,
    pub body: &'static str,
}

pub static TEMPLATES: [PromptTemplate; 8] = [
    PromptTemplate { stage: StageId::FamilyTypes, role: Role::System, file_name: "b1_system.txt", body: include_str!("templates/b1_system.txt") },
    PromptTemplate { stage: StageId::FamilyTypes, role: Role::User, file_name: "b1_user.txt", body: include_str!("templates/b1_user.txt") },
    PromptTemplate { stage: StageId::WeatherRanges, role: Role::System, file_name: "b2_system.txt", body: include_str!("templates/b2_system.txt") },
    PromptTemplate { stage: StageId::WeatherRanges, role: Role::User, file_name: "b2_user.txt", body: include_str!("templates/b2_user.txt") },
    PromptTemplate { stage: StageId::WeatherData, role: Role::System, file_name: "b3_system.txt", body: include_str!("templates/b3_system.txt") },
    PromptTemplate { stage: StageId::WeatherData, role: Role::User, file_name: "b3_user.txt", body: include_str!("templates/b3_user.txt") },
    PromptTemplate { stage: StageId::EnergyPatterns, role: Role::System, file_name: "b4_system.txt", body: include_str!("templates/b4_system.txt") },
    PromptTemplate { stage: StageId::EnergyPatterns, role: Role::User, file_name: "b4_user.txt", body: include_str!("templates/b4_user.txt") },
];

pub fn template(stage: StageId, role: Role) -> &'static PromptTemplate {
    TEMPLATES
        .iter()
        .find(|t| t.stage == stage && t.role == role)
        .expect("every stage has a system and a user template")
}

impl PromptTemplate {
    pub fn placeholders(&self) -> BTreeSet<String> {
        placeholders_in(self.body)
    }
}

struct Token<'a> {
    start: usize,
    end: usize,
    name: &'a str,
}

fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'-'
}

/// Finds `$NAME$` tokens. A `$` adjacent to another `$` never opens or
/// closes a token, so `$$MESSAGE_START$$` is plain text. When the token is
/// wrapped as `[$NAME$]` the brackets belong to the token.
fn scan(text: &str) -> Vec<Token<'_>> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'$' && (i == 0 || b[i - 1] != b'$') && i + 1 < b.len() && b[i + 1].is_ascii_alphabetic() {
            let mut j = i + 1;
            while j < b.len() && is_name_byte(b[j]) {
                j += 1;
            }
            if j < b.len() && b[j] == b'$' && b.get(j + 1) != Some(&b'$') {
                let bracketed = i > 0 && b[i - 1] == b'[' && b.get(j + 1) == Some(&b']');
                let (start, end) = if bracketed { (i - 1, j + 2) } else { (i, j + 1) };
                out.push(Token { start, end, name: &text[i + 1..j] });
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    out
}

pub fn placeholders_in(text: &str) -> BTreeSet<String> {
    scan(text).into_iter().map(|t| t.name.to_string()).collect()
}

/// Substitutes every placeholder literally. Bindings for names the template
/// does not use are ignored with a warning.
pub fn render(template: &PromptTemplate, bindings: &Bindings) -> Result<ChatMessage, PromptError> {
    let tokens = scan(template.body);
    if let Some(t) = tokens.iter().find(|t| !bindings.contains_key(t.name)) {
        return Err(PromptError::MissingPlaceholder(t.name.to_string()));
    }
    for name in bindings.keys() {
        if !tokens.iter().any(|t| t.name == name) {
            log::warn!("{}: binding {name} has no placeholder", template.file_name);
        }
    }
    let mut out = String::with_capacity(template.body.len() + 256);
    let mut last = 0;
    for t in &tokens {
        out.push_str(&template.body[last..t.start]);
        out.push_str(&bindings[t.name]);
        last = t.end;
    }
    out.push_str(&template.body[last..]);
    Ok(ChatMessage { role: template.role, content: out })
}

fn bindings<const N: usize>(pairs: [(&str, String); N]) -> Bindings {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn system(stage: StageId) -> ChatMessage {
    ChatMessage::system(template(stage, Role::System).body)
}

fn user(stage: StageId, b: &Bindings) -> Result<ChatMessage, PromptError> {
    render(template(stage, Role::User), b)
}

/// Stage 1: one request per country.
pub fn family_types_messages(country: Country) -> Result<Vec<ChatMessage>, PromptError> {
    let b = bindings([("COUNTRY", country.name().to_string())]);
    Ok(vec![system(StageId::FamilyTypes), user(StageId::FamilyTypes, &b)?])
}

/// Stage 2: one request per country.
pub fn weather_ranges_messages(country: Country, year: i32) -> Result<Vec<ChatMessage>, PromptError> {
    let b = bindings([("Country", country.name().to_string()), ("Year", year.to_string())]);
    Ok(vec![system(StageId::WeatherRanges), user(StageId::WeatherRanges, &b)?])
}

/// User-prompt bindings for one Stage-3 season.
pub fn weather_data_bindings(country: Country, year: i32, season: Season, ranges: &SeasonalWeatherRanges) -> Bindings {
    let mut b = bindings([
        ("Country", country.name().to_string()),
        ("Year", year.to_string()),
        ("Season", season.name().to_string()),
    ]);
    for p in WeatherParameter::ALL {
        let r = ranges.get(p, season);
        b.insert(format!("{}_Min", p.section_name()), r.min.to_string());
        b.insert(format!("{}_Max", p.section_name()), r.max.to_string());
    }
    b
}

pub fn weather_data_user_message(
    country: Country,
    year: i32,
    season: Season,
    ranges: &SeasonalWeatherRanges,
) -> Result<ChatMessage, PromptError> {
    user(StageId::WeatherData, &weather_data_bindings(country, year, season, ranges))
}

/// Stage 3 chains the seasons of one country into a single conversation:
/// `[system, user_1, assistant_1, ..., user_k]`. Each prior pair must be the
/// user prompt for the corresponding earlier season, re-rendered exactly.
pub fn build_stage3_conversation(
    country: Country,
    year: i32,
    seasons: &[Season],
    season_index: usize,
    ranges: &SeasonalWeatherRanges,
    prior: &[(ChatMessage, ChatMessage)],
) -> Result<Vec<ChatMessage>, PromptError> {
    let history = |m: String| PromptError::History(m);
    if season_index >= seasons.len() {
        return Err(history(format!("season index {season_index} out of range")));
    }
    if ranges.country != country {
        return Err(history(format!("ranges are for {}, not {country}", ranges.country)));
    }
    if prior.len() != season_index {
        return Err(history(format!("expected {season_index} earlier seasons, got {}", prior.len())));
    }
    let mut messages = vec![system(StageId::WeatherData)];
    for (i, (u, a)) in prior.iter().enumerate() {
        let expected = weather_data_user_message(country, year, seasons[i], ranges)?;
        if *u != expected {
            return Err(history(format!(
                "turn {} is not the {} prompt for {country}",
                i + 1,
                seasons[i]
            )));
        }
        if a.role != Role::Assistant {
            return Err(history(format!("turn {} reply is not an assistant message", i + 1)));
        }
        messages.push(u.clone());
        messages.push(a.clone());
    }
    messages.push(weather_data_user_message(country, year, seasons[season_index], ranges)?);
    Ok(messages)
}

fn csv_list(series: &str, values: impl Iterator<Item = String>) -> Result<String, PromptError> {
    let v: Vec<String> = values.collect();
    if v.len() != HOURS {
        return Err(PromptError::Shape { series: series.to_string(), count: v.len() });
    }
    Ok(v.join(","))
}

/// The six weather lists of the Stage-4 user prompt, each ordered by hour.
pub fn bind_stage4_weather(day: &HourlyWeatherDay) -> Result<Bindings, PromptError> {
    let list = |p: WeatherParameter| csv_list(p.section_name(), day.get(p).iter().map(|e| e.value.to_string()));
    let hours = day.get(WeatherParameter::Temperature).len();
    Ok(bindings([
        ("Hour", csv_list("Hour", (0..hours).map(|h| h.to_string()))?),
        ("Temperature", list(WeatherParameter::Temperature)?),
        ("Humidity", list(WeatherParameter::Humidity)?),
        ("SolarRadiationDirect", list(WeatherParameter::SolRadDirect)?),
        ("SolarRadiationDiffuse", list(WeatherParameter::SolRadDiffuse)?),
        ("WindSpeed", list(WeatherParameter::WindSpeed)?),
    ]))
}

/// Stage 4: one stateless request per family, season and day type.
pub fn energy_patterns_messages(
    family: &FamilyStructure,
    year: i32,
    season: Season,
    day_type: DayType,
    weather: &HourlyWeatherDay,
) -> Result<Vec<ChatMessage>, PromptError> {
    let mut b = bind_stage4_weather(weather)?;
    b.extend(bindings([
        ("Country", family.country.name().to_string()),
        ("Year", year.to_string()),
        ("Pattern", day_type.name().to_string()),
        ("Season", season.name().to_string()),
        ("FamilyType", family.family_type.clone()),
        ("Members", family.members.join(", ")),
        ("MembersNum", family.members.len().to_string()),
    ]));
    Ok(vec![system(StageId::EnergyPatterns), user(StageId::EnergyPatterns, &b)?])
}

/// Identifies the stage of a conversation by its system prompt.
pub fn stage_of_messages(messages: &[ChatMessage]) -> Option<StageId> {
    let first = messages.first().filter(|m| m.role == Role::System)?;
    TEMPLATES
        .iter()
        .find(|t| t.role == Role::System && t.body == first.content)
        .map(|t| t.stage)
}

/// Writes every template to `dir`, returning the paths written.
pub fn dump_prompts(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    TEMPLATES
        .iter()
        .map(|t| {
            let path = dir.join(t.file_name);
            std::fs::write(&path, t.body)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_hourly_weather, parse_weather_ranges, Envelope, HourlyEntry};
    use crate::numeric::Decimal;
    use proptest::prelude::*;
    use sha2::{Digest, Sha256};

    fn ranges(country: Country) -> SeasonalWeatherRanges {
        let text = "#Temperature#[(Winter,-20,10),(Spring,-5,25),(Summer,15,35),(Autumn,0,20)]\
            #Humidity#[(Winter,30,70),(Spring,40,80),(Summer,50,90),(Autumn,40,80)]\
            #SolRad-Diffuse#[(Winter,50,150),(Spring,100,250),(Summer,150,350),(Autumn,100,250)]\
            #SolRad-Direct#[(Winter,100,300),(Spring,200,500),(Summer,300,700),(Autumn,200,500)]\
            #Wind-Speed#[(Winter,0,15),(Spring,2,18),(Summer,2,15),(Autumn,2,18)]";
        parse_weather_ranges(&Envelope::from_inner(text), country).unwrap()
    }

    #[test]
    fn templates_are_pinned() {
        let expected = [
            ("b1_system.txt", "24dd957a1e2efaf07a4c5085b0afd8c6be5c7e4403ba4947f34626b54f3f7225"),
            ("b1_user.txt", "5c91c3c8f8a544c71312fdc14885930d1095e329713685965470b62dc4b39a9b"),
            ("b2_system.txt", "82a5a7a829b8e54c65b7098495400a2ec0f87428239363fa2b110a8f6e93bae8"),
            ("b2_user.txt", "05652b48e1913e307206b1ec177770d065f21f4b236992201b928040bdba5cb0"),
            ("b3_system.txt", "9a6364ff78f5806e718dea502ca35c5c1f0375e4b65d1eacd1c893366614544b"),
            ("b3_user.txt", "b25021f9c4767d1ce34464b5dfa04bd45fad5c6f75b43f2675052cd549ea5866"),
            ("b4_system.txt", "2d83e1aa62513c0737599a4729d532c7c787275a237ab86ac48228029a064e9d"),
            ("b4_user.txt", "fd81f1e4ecc4d4471c949781823717ffbd24762537224e70c946af9b5757c51d"),
        ];
        for (t, (name, digest)) in TEMPLATES.iter().zip(expected) {
            assert_eq!(t.file_name, name);
            assert_eq!(hex::encode(Sha256::digest(t.body.as_bytes())), digest, "{name} changed");
        }
    }

    #[test]
    fn placeholder_sets() {
        let set = |stage, role| template(stage, role).placeholders();
        assert_eq!(set(StageId::FamilyTypes, Role::User), BTreeSet::from(["COUNTRY".to_string()]));
        assert_eq!(set(StageId::WeatherRanges, Role::User), BTreeSet::from(["Country".to_string(), "Year".to_string()]));
        assert_eq!(set(StageId::WeatherData, Role::User).len(), 13);
        assert_eq!(set(StageId::EnergyPatterns, Role::User).len(), 13);
        for stage in StageId::ALL {
            assert!(set(stage, Role::System).is_empty(), "{stage:?} system prompt has placeholders");
        }
    }

    #[test]
    fn family_prompt_names_the_country() {
        let m = family_types_messages(Country::India).unwrap();
        assert!(m[1].content.contains("the following country: India."));
        assert!(m[0].content.contains("$$MESSAGE_START$$"));
    }

    #[test]
    fn bracketed_placeholders_drop_brackets() {
        let m = weather_ranges_messages(Country::Uae, 2024).unwrap();
        assert!(m[1].content.starts_with("For the country of United Arab Emirates and in the year of 2024,"));
        let u = weather_data_user_message(Country::Usa, 2024, Season::Winter, &ranges(Country::Usa)).unwrap();
        assert!(u.content.contains("- Temperature: [-20, 10] (°C)"), "{}", u.content);
        assert!(u.content.contains("- Solar Radiation (Direct): [100, 300] (W/m²)"));
    }

    #[test]
    fn missing_binding() {
        let mut b = bindings([("Country", "USA".into())]);
        b.insert("Unused".into(), "x".into());
        assert_eq!(
            render(template(StageId::WeatherRanges, Role::User), &b).unwrap_err(),
            PromptError::MissingPlaceholder("Year".into())
        );
        let sys = template(StageId::FamilyTypes, Role::System);
        assert_eq!(render(sys, &Bindings::new()).unwrap().content, sys.body);
    }

    #[test]
    fn stage4_without_members_binding() {
        let day = sample_day(|h| h as f64);
        let mut b = bind_stage4_weather(&day).unwrap();
        for (k, v) in [("Country", "USA"), ("Year", "2024"), ("Pattern", "Weekday"), ("Season", "Winter"), ("FamilyType", "Nuclear"), ("MembersNum", "4")] {
            b.insert(k.into(), v.into());
        }
        assert_eq!(
            render(template(StageId::EnergyPatterns, Role::User), &b).unwrap_err(),
            PromptError::MissingPlaceholder("Members".into())
        );
    }

    fn sample_day(temp: impl Fn(usize) -> f64) -> HourlyWeatherDay {
        let series = WeatherParameter::ALL
            .iter()
            .map(|&p| {
                let v = (0..24)
                    .map(|h| {
                        let x = if p == WeatherParameter::Temperature { temp(h) } else { 1.0 };
                        HourlyEntry::new(h as u8, "x", Decimal::new(x, 0))
                    })
                    .collect();
                (p, v)
            })
            .collect();
        HourlyWeatherDay::new(Country::Usa, Season::Winter, series).unwrap()
    }

    #[test]
    fn weather_lists_by_hour() {
        let b = bind_stage4_weather(&sample_day(|h| h as f64)).unwrap();
        let expected: Vec<String> = (0..24).map(|h| h.to_string()).collect();
        assert_eq!(b["Temperature"], expected.join(","));
        assert_eq!(b["Hour"], expected.join(","));
        let mut short = sample_day(|h| h as f64);
        short.series.get_mut(&WeatherParameter::Temperature).unwrap().pop();
        assert!(matches!(bind_stage4_weather(&short), Err(PromptError::Shape { count: 23, .. })));
    }

    #[test]
    fn stage4_prompt_uses_sample_weather() {
        let raw = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/b3_sample.txt")).unwrap();
        let env = crate::parser::extract_envelope(&raw).unwrap();
        let day = parse_hourly_weather(&env, Country::Usa, Season::Winter).unwrap();
        let b = bind_stage4_weather(&day).unwrap();
        assert!(b["Temperature"].starts_with("-5.0,-4.5,-4.0"));
        let family = FamilyStructure {
            country: Country::Usa,
            family_type: "Nuclear Family".into(),
            members: vec!["Father".into(), "Mother".into()],
        };
        let m = energy_patterns_messages(&family, 2024, Season::Winter, DayType::Weekend, &day).unwrap();
        assert!(m[1].content.contains("the following members: Father, Mother total of 2."));
        assert!(m[1].content.contains("usage pattern in the Weekend considering the season is Winter."));
        assert!(placeholders_in(&m[1].content).is_empty());
    }

    #[test]
    fn stage3_history_shapes() {
        let r = ranges(Country::Usa);
        let seasons = Season::ALL;
        let mut prior = Vec::new();
        for k in 0..4 {
            let conv = build_stage3_conversation(Country::Usa, 2024, &seasons, k, &r, &prior).unwrap();
            assert_eq!(conv.len(), 2 + 2 * k);
            for (i, m) in conv.iter().enumerate() {
                let want = match i {
                    0 => Role::System,
                    i if i % 2 == 1 => Role::User,
                    _ => Role::Assistant,
                };
                assert_eq!(m.role, want);
            }
            assert!(conv.last().unwrap().content.contains(&format!("during the {} season", seasons[k])));
            prior.push((conv.last().unwrap().clone(), ChatMessage::assistant(format!("reply {k}"))));
        }
    }

    #[test]
    fn stage3_rejects_foreign_history() {
        let r = ranges(Country::Usa);
        let japan = ranges(Country::Japan);
        let foreign = weather_data_user_message(Country::Japan, 2024, Season::Winter, &japan).unwrap();
        let prior = vec![(foreign, ChatMessage::assistant("x"))];
        assert!(matches!(
            build_stage3_conversation(Country::Usa, 2024, &Season::ALL, 1, &r, &prior),
            Err(PromptError::History(_))
        ));
        assert!(build_stage3_conversation(Country::Usa, 2024, &Season::ALL, 2, &r, &prior).is_err());
        let own = weather_data_user_message(Country::Usa, 2024, Season::Spring, &r).unwrap();
        let out_of_order = vec![(own, ChatMessage::assistant("x"))];
        assert!(build_stage3_conversation(Country::Usa, 2024, &Season::ALL, 1, &r, &out_of_order).is_err());
    }

    #[test]
    fn stage_detection() {
        let m = weather_ranges_messages(Country::Brazil, 2024).unwrap();
        assert_eq!(stage_of_messages(&m), Some(StageId::WeatherRanges));
        assert_eq!(stage_of_messages(&[ChatMessage::system("other")]), None);
    }

    #[test]
    fn dump_writes_all_templates() {
        let dir = tempfile::tempdir().unwrap();
        let paths = dump_prompts(dir.path()).unwrap();
        assert_eq!(paths.len(), 8);
        assert_eq!(std::fs::read_to_string(&paths[7]).unwrap(), TEMPLATES[7].body);
    }

    proptest! {
        #[test]
        fn rendering_leaves_no_placeholders(value in "[A-Za-z0-9 ,.()-]{1,30}") {
            for t in TEMPLATES.iter() {
                let b: Bindings = t.placeholders().into_iter().map(|n| (n, value.clone())).collect();
                let out = render(t, &b).unwrap();
                prop_assert!(placeholders_in(&out.content).is_empty());
            }
        }

        #[test]
        fn ranges_reach_the_prompt(lo in -50i64..0, hi in 0i64..60) {
            let text = format!(
                "#Temperature#[(Winter,{lo},{hi}),(Spring,0,1),(Summer,0,1),(Autumn,0,1)]\
                 #Humidity#[(Winter,0,1),(Spring,0,1),(Summer,0,1),(Autumn,0,1)]\
                 #SolRad-Diffuse#[(Winter,0,1),(Spring,0,1),(Summer,0,1),(Autumn,0,1)]\
                 #SolRad-Direct#[(Winter,0,1),(Spring,0,1),(Summer,0,1),(Autumn,0,1)]\
                 #Wind-Speed#[(Winter,0,1),(Spring,0,1),(Summer,0,1),(Autumn,0,1)]"
            );
            let r = parse_weather_ranges(&Envelope::from_inner(text), Country::Sweden).unwrap();
            let u = weather_data_user_message(Country::Sweden, 2024, Season::Winter, &r).unwrap();
            let expected = format!("- Temperature: [{lo}, {hi}] (°C)");
            prop_assert!(u.content.contains(&expected));
        }
    }
}
