//! Persisted household artifacts: family JSON files and the per-profile CSV
//! in the hour / total / member / HVAC column layout.

use std::fs;
use std::path::{Path, PathBuf};

use crate::domain::{slugify, Country, DayType, Season};
use crate::numeric::Decimal;
use crate::parser::{
    compute_totals, parse_family_structures, DailyConsumptionProfile, Envelope, FamilyStructure, HourlyEntry,
    MemberSeries, ParseError, HOURS,
};

/// Totals are re-derived on load; a stored total may differ from the
/// recomputed one by at most this much.
pub const CONSERVATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum HouseholdError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path} hour {hour}: stored total {stored} but members and HVAC sum to {computed}")]
    Conservation { path: PathBuf, hour: usize, stored: String, computed: String },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HouseholdError + '_ {
    move |source| HouseholdError::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, message: impl Into<String>) -> HouseholdError {
    HouseholdError::Format { path: path.to_path_buf(), message: message.into() }
}

/// Writes via a temporary sibling so a resumed run never sees a partial
/// file.
fn write_whole(path: &Path, bytes: &[u8]) -> Result<(), HouseholdError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Stable identifier of the `index`-th family (0-based) of a country.
pub fn family_id(index: usize, family: &FamilyStructure) -> String {
    format!("f{}-{}", index + 1, slugify(&family.family_type))
}

pub fn write_families(path: &Path, families: &[FamilyStructure]) -> Result<(), HouseholdError> {
    let country = families.first().map(|f| f.country).ok_or_else(|| format_err(path, "no families to write"))?;
    let text = crate::parser::format_family_structures(country, families);
    write_whole(path, (text + "\n").as_bytes())
}

pub fn read_families(path: &Path, country: Country) -> Result<Vec<FamilyStructure>, HouseholdError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let count = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .and_then(|v| v.pointer("/0/Families").and_then(|f| f.as_array()).map(Vec::len))
        .ok_or_else(|| format_err(path, "not a family file"))?;
    parse_family_structures(&Envelope::from_inner(text), country, count)
        .map_err(|source| HouseholdError::Parse { path: path.to_path_buf(), source })
}

pub fn profile_csv_header(members: &[String]) -> Vec<String> {
    let mut h = vec!["hour".to_string(), "total_kwh".to_string()];
    for m in members {
        h.push(format!("{m}_action"));
        h.push(format!("{m}_kwh"));
    }
    for s in ["heating_action", "heating_kwh", "cooling_action", "cooling_kwh"] {
        h.push(s.to_string());
    }
    h
}

pub fn write_profile_csv(path: &Path, p: &DailyConsumptionProfile) -> Result<(), HouseholdError> {
    let csv_err = |e: csv::Error| format_err(path, e.to_string());
    let members: Vec<String> = p.members.iter().map(|m| m.member.clone()).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(profile_csv_header(&members)).map_err(csv_err)?;
    for h in 0..HOURS {
        let mut row = vec![h.to_string(), p.totals[h].to_string()];
        for series in p.members.iter().map(|m| &m.entries).chain([&p.heating, &p.cooling]) {
            row.push(series[h].label.clone());
            row.push(series[h].value.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| format_err(path, e.to_string()))?;
    write_whole(path, &bytes)
}

/// Loads a profile CSV and re-checks that every stored total equals the
/// sum of its member and HVAC columns.
pub fn read_profile_csv(
    path: &Path,
    country: Country,
    family_type: &str,
    season: Season,
    day_type: DayType,
) -> Result<DailyConsumptionProfile, HouseholdError> {
    let csv_err = |e: csv::Error| format_err(path, e.to_string());
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header.len() < 6 || header.len() % 2 != 0 || header[0] != "hour" || header[1] != "total_kwh" {
        return Err(format_err(path, "unexpected header"));
    }
    let tail = &header[header.len() - 4..];
    if tail != ["heating_action", "heating_kwh", "cooling_action", "cooling_kwh"] {
        return Err(format_err(path, "missing HVAC columns"));
    }
    let mut members = Vec::new();
    for pair in header[2..header.len() - 4].chunks(2) {
        let name = pair[0]
            .strip_suffix("_action")
            .filter(|n| pair[1].strip_suffix("_kwh") == Some(*n))
            .ok_or_else(|| format_err(path, format!("bad member columns {pair:?}")))?;
        members.push(name.to_string());
    }
    let mut series: Vec<Vec<HourlyEntry>> = vec![Vec::new(); members.len() + 2];
    let mut stored = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |s: &str| s.trim().parse::<Decimal>().map_err(|e| format_err(path, format!("row {i}: {e}")));
        let hour: u8 = rec[0].trim().parse().map_err(|_| format_err(path, format!("row {i}: bad hour")))?;
        if hour as usize != i {
            return Err(format_err(path, format!("row {i} has hour {hour}")));
        }
        stored.push(num(&rec[1])?);
        for (k, s) in series.iter_mut().enumerate() {
            s.push(HourlyEntry::new(hour, rec[2 + 2 * k].trim(), num(&rec[3 + 2 * k])?));
        }
    }
    if stored.len() != HOURS {
        return Err(format_err(path, format!("{} rows instead of 24", stored.len())));
    }
    let cooling = series.pop().unwrap_or_default();
    let heating = series.pop().unwrap_or_default();
    let members: Vec<MemberSeries> = members
        .into_iter()
        .zip(series)
        .map(|(member, entries)| MemberSeries { member, entries })
        .collect();
    let computed = compute_totals(&members, &heating, &cooling);
    for (hour, (s, c)) in stored.iter().zip(&computed).enumerate() {
        if (s.value - c.value).abs() > CONSERVATION_TOLERANCE {
            return Err(HouseholdError::Conservation {
                path: path.to_path_buf(),
                hour,
                stored: s.to_string(),
                computed: c.to_string(),
            });
        }
    }
    Ok(DailyConsumptionProfile::new(country, family_type, season, day_type, members, heating, cooling))
}

/// File name of a daily profile within a family directory.
pub fn profile_file_name(season: Season, day_type: DayType) -> String {
    format!("{}_{}.csv", season.name().to_lowercase(), day_type.name().to_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> DailyConsumptionProfile {
        let e = |label: &str, v: f64| (0..24).map(|h| HourlyEntry::new(h, label, Decimal::new(v, 2))).collect::<Vec<_>>();
        DailyConsumptionProfile::new(
            Country::Japan,
            "Nuclear Family",
            Season::Summer,
            DayType::Weekend,
            vec![MemberSeries { member: "Father".into(), entries: e("Relaxing", 0.12) }],
            e("No-Heating", 0.0),
            e("Cooling-on", 0.5),
        )
    }

    #[test]
    fn profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let p = profile();
        write_profile_csv(&path, &p).unwrap();
        let back = read_profile_csv(&path, Country::Japan, "Nuclear Family", Season::Summer, DayType::Weekend).unwrap();
        assert_eq!(back, p);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("hour,total_kwh,Father_action,Father_kwh,heating_action"));
        assert!(text.lines().nth(1).unwrap().starts_with("0,0.62,Relaxing,0.12"));
    }

    #[test]
    fn tampered_total_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_profile_csv(&path, &profile()).unwrap();
        let text = fs::read_to_string(&path).unwrap().replacen("\n3,0.62,", "\n3,0.63,", 1);
        fs::write(&path, text).unwrap();
        let e = read_profile_csv(&path, Country::Japan, "x", Season::Summer, DayType::Weekend).unwrap_err();
        assert!(matches!(e, HouseholdError::Conservation { hour: 3, .. }), "{e}");
    }

    #[test]
    fn families_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("india.json");
        let fams = vec![FamilyStructure {
            country: Country::India,
            family_type: "Joint Family".into(),
            members: ["Grandfather", "Grandmother", "Father", "Mother", "Son", "Daughter", "Uncle", "Aunt", "Cousin"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }];
        write_families(&path, &fams).unwrap();
        assert_eq!(read_families(&path, Country::India).unwrap(), fams);
        assert_eq!(family_id(0, &fams[0]), "f1-joint-family");
    }
}
