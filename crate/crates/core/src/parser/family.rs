use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{Envelope, ParseError};
use crate::domain::Country;

/// One family type generated for a country.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyStructure {
    pub country: Country,
    pub family_type: String,
    pub members: Vec<String>,
}

fn content(msg: impl Into<String>) -> ParseError {
    ParseError::Content(msg.into())
}

fn key_matches(key: &str, want: &str) -> bool {
    let k: String = key.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect();
    k == want
}

fn field<'a>(obj: &'a Map<String, Value>, want: &str) -> Option<&'a Value> {
    obj.iter().find(|(k, _)| key_matches(k, want)).map(|(_, v)| v)
}

/// Applies the Stage-1 formatting rules: characters the prompt forbids
/// become hyphens; runs of hyphens collapse.
pub fn sanitize_label(raw: &str) -> String {
    let mut out = String::new();
    for c in raw.trim().chars() {
        let c = if matches!(c, '\'' | '"' | '{' | '}' | '&' | '*' | '\\' | '#') || c.is_control() { '-' } else { c };
        if c == '-' && out.ends_with('-') {
            continue;
        }
        out.push(c);
    }
    out.trim_matches(|c: char| c == '-' || c.is_whitespace()).to_string()
}

fn string_of(v: &Value, what: &str) -> Result<String, ParseError> {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(content(format!("{what} is not a string"))),
    };
    let clean = sanitize_label(&s);
    if clean.is_empty() {
        return Err(content(format!("{what} is empty")));
    }
    Ok(clean)
}

fn parse_family(v: &Value, country: Country) -> Result<FamilyStructure, ParseError> {
    let obj = v.as_object().ok_or_else(|| content("family entry is not an object"))?;
    let family_type = string_of(
        field(obj, "familytype").ok_or_else(|| content("family entry has no \"Family Type\""))?,
        "family type",
    )?;
    let raw_members = field(obj, "members")
        .and_then(Value::as_array)
        .ok_or_else(|| content(format!("family {family_type:?} has no \"Members\" list")))?;
    let mut members: Vec<String> = Vec::with_capacity(raw_members.len());
    for m in raw_members {
        let label = string_of(m, "member label")?;
        // a repeated role ("Son", "Son") gets a numeric suffix so member series stay distinct
        let mut candidate = label.clone();
        let mut n = 2;
        while members.iter().any(|x| x.eq_ignore_ascii_case(&candidate)) {
            candidate = format!("{label}-{n}");
            n += 1;
        }
        members.push(candidate);
    }
    if members.is_empty() {
        return Err(content(format!("family {family_type:?} has no members")));
    }
    Ok(FamilyStructure { country, family_type, members })
}

/// Parses the Stage-1 JSON payload: an array of `{"Country", "Families"}`
/// objects (a bare object is accepted too).
pub fn parse_family_structures(
    env: &Envelope,
    expected_country: Country,
    expected_count: usize,
) -> Result<Vec<FamilyStructure>, ParseError> {
    let doc: Value = serde_json::from_str(env.inner_text()).map_err(|e| ParseError::Syntax {
        context: "family JSON".into(),
        message: e.to_string(),
    })?;
    let entries = match &doc {
        Value::Array(a) => a.iter().collect::<Vec<_>>(),
        Value::Object(_) => vec![&doc],
        _ => return Err(content("expected a JSON array of country objects")),
    };
    if entries.is_empty() {
        return Err(content("empty family list"));
    }
    let mut families = Vec::new();
    for entry in entries {
        let obj = entry.as_object().ok_or_else(|| content("country entry is not an object"))?;
        let name = field(obj, "country")
            .and_then(Value::as_str)
            .ok_or_else(|| content("country entry has no \"Country\""))?;
        let country: Country = name
            .parse()
            .map_err(|_| content(format!("response is for {name:?}, expected {expected_country}")))?;
        if country != expected_country {
            return Err(content(format!("response is for {country}, expected {expected_country}")));
        }
        let list = field(obj, "families")
            .and_then(Value::as_array)
            .ok_or_else(|| content("country entry has no \"Families\" list"))?;
        for f in list {
            families.push(parse_family(f, country)?);
        }
    }
    let mut seen = BTreeSet::new();
    for f in &families {
        if !seen.insert(f.family_type.to_lowercase()) {
            return Err(content(format!("duplicate family type {:?}", f.family_type)));
        }
    }
    if families.len() != expected_count {
        return Err(content(format!("expected {expected_count} family types, got {}", families.len())));
    }
    Ok(families)
}

/// Serializes families in the Stage-1 JSON schema.
pub fn format_family_structures(country: Country, families: &[FamilyStructure]) -> String {
    let list: Vec<Value> = families
        .iter()
        .map(|f| json!({ "Family Type": f.family_type, "Members": f.members }))
        .collect();
    let doc = json!([{ "Country": country.name(), "Families": list }]);
    serde_json::to_string_pretty(&doc).expect("JSON values always serialize")
}
